import math

import numpy as np
from skimage import transform

from ..core.config import LateralityRule
from ..core.errors import CoincidentPoints
from ..core.schemas import DiscGeometry, Laterality, PointPx

# Fovea within this many pixels of the disc column gives UNKNOWN laterality
LATERALITY_TOLERANCE_PX = 1.0


def _normalize(angle_deg):
    # (-180, 180]
    angle_deg = math.fmod(angle_deg, 360.0)
    if angle_deg <= -180.0:
        angle_deg += 360.0
    elif angle_deg > 180.0:
        angle_deg -= 360.0
    return angle_deg


def axis_angle(disc_center, fovea):
    """
    Direction of the disc-to-fovea vector in image coordinates (y down), degrees in (-180, 180]
    """
    dx = fovea.x - disc_center.x
    dy = fovea.y - disc_center.y
    if dx == 0 and dy == 0:
        raise CoincidentPoints("Disc centre and fovea coincide; the disc-fovea axis is undefined")
    return _normalize(math.degrees(math.atan2(dy, dx)))


def determine_laterality(disc_center, fovea, rule=LateralityRule.FOVEA_LEFT_IS_OD, override=None,
                         tolerance=LATERALITY_TOLERANCE_PX):
    """
    Decide which eye a photograph shows from the fovea position relative to the disc

    Args:
        disc_center (PointPx): Disc centre
        fovea (PointPx): Fovea
        rule (LateralityRule): Which side of the disc the fovea lies on in a right eye
        override (Laterality): Manifest value, wins over the geometric rule when given
        tolerance (float): Horizontal dead band in pixels

    Returns:
        Laterality: OD, OS or UNKNOWN
    """
    if override is not None:
        return Laterality(override)
    rule = LateralityRule(rule)
    if rule == LateralityRule.MANIFEST_ONLY:
        return Laterality.UNKNOWN

    left_eye, right_eye = Laterality.OS, Laterality.OD
    if rule == LateralityRule.FOVEA_LEFT_IS_OS:
        left_eye, right_eye = right_eye, left_eye

    if fovea.x < disc_center.x - tolerance:
        return right_eye
    if fovea.x > disc_center.x + tolerance:
        return left_eye
    return Laterality.UNKNOWN


def crop_origin_for(center, size=650):
    half = size // 2
    return int(math.floor(center.x + 0.5)) - half, int(math.floor(center.y + 0.5)) - half


def crop_about(raster, center, size=650):
    """
    Cut a size x size window centred on a point; pixels outside the source are zero

    Args:
        raster (numpy.ndarray): Image or mask
        center (PointPx): Window centre, rounded to the nearest pixel
        size (int): Window side

    Returns:
        tuple: (cropped raster, crop origin as PointPx)
    """
    x0, y0 = crop_origin_for(center, size)
    return crop_at(raster, x0, y0, size), PointPx(x=float(x0), y=float(y0))


def crop_at(raster, x0, y0, size=650):
    """
    Cut a size x size window whose top-left pixel is (x0, y0), zero-filled outside the source
    """
    raster = np.asarray(raster)
    x0, y0 = int(x0), int(y0)
    out = np.zeros((size, size) + raster.shape[2:], dtype=raster.dtype)

    height, width = raster.shape[:2]
    src_x0, src_y0 = max(x0, 0), max(y0, 0)
    src_x1, src_y1 = min(x0 + size, width), min(y0 + size, height)
    if src_x0 < src_x1 and src_y0 < src_y1:
        out[src_y0 - y0:src_y1 - y0, src_x0 - x0:src_x1 - x0] = raster[src_y0:src_y1, src_x0:src_x1]
    return out


def zone_angle_of(pixel, disc_center, axis_angle_deg):
    """
    Angle of a pixel around the disc, measured from the disc-fovea axis

    The vector disc -> pixel is rotated into the frame where the axis is +x and image-down
    stays on the +y side; zero lies on the axis towards the fovea.

    Returns:
        float: Degrees in (-180, 180]
    """
    dx = pixel.x - disc_center.x
    dy = pixel.y - disc_center.y
    if dx == 0 and dy == 0:
        raise CoincidentPoints("The disc centre has no zone angle")
    theta = math.radians(axis_angle_deg)
    rx = math.cos(theta) * dx + math.sin(theta) * dy
    ry = -math.sin(theta) * dx + math.cos(theta) * dy
    return _normalize(math.degrees(math.atan2(ry, rx)))


def zone_angle_map(shape, disc_center, axis_angle_deg):
    """
    Vectorised zone_angle_of for every pixel of a raster of the given shape

    The disc centre itself, when it falls on a pixel, gets angle 0.
    """
    rows, cols = np.indices(shape[:2], dtype=np.float64)
    dx = cols - disc_center.x
    dy = rows - disc_center.y
    theta = math.radians(axis_angle_deg)
    rx = math.cos(theta) * dx + math.sin(theta) * dy
    ry = -math.sin(theta) * dx + math.cos(theta) * dy
    angles = np.degrees(np.arctan2(ry, rx))
    angles[angles <= -180.0] = 180.0
    return angles


def axis_points_left(axis_angle_deg):
    return math.cos(math.radians(axis_angle_deg)) < 0


def inferior_angle_map(shape, disc_center, axis_angle_deg):
    """
    Zone angles with image-down on the positive side whichever way the fovea lies

    When the axis points left the rotation carries image-down to negative angles, so the map
    is negated. Only the axis decides this; the eye label plays no part.
    """
    angles = zone_angle_map(shape, disc_center, axis_angle_deg)
    if axis_points_left(axis_angle_deg):
        angles = -angles
        angles[angles <= -180.0] = 180.0
    return angles


def rotate_for_display(image, axis_angle_deg, center):
    """
    Rotate an image about a point so the disc-fovea axis is horizontal (display only)
    """
    image = np.asarray(image)
    if axis_angle_deg == 0:
        return image.copy()
    rotated = transform.rotate(
        image.astype(np.float64),
        angle=axis_angle_deg,
        center=(center.x, center.y),
        order=1,
        mode="constant",
        cval=0.0,
        preserve_range=True,
    )
    return np.clip(np.rint(rotated), 0, 255).astype(image.dtype)


def build_geometry(disc_center, fovea, crop_origin, crop_size=650, rule=LateralityRule.FOVEA_LEFT_IS_OD,
                   override=None):
    """
    Assemble the disc-fovea geometry of one image (all points in the preprocessed frame)
    """
    return DiscGeometry(
        disc_center=disc_center,
        fovea=fovea,
        axis_angle_deg=axis_angle(disc_center, fovea),
        laterality=determine_laterality(disc_center, fovea, rule=rule, override=override),
        crop_origin=crop_origin,
        crop_size=crop_size,
    )
