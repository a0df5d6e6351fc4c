import math

import numpy as np
from scipy import ndimage
from skimage import measure

from ..core.errors import DegenerateShape, EmptyMask
from ..core.schemas import EllipseFit, PointPx

# Foreground components are 8-connected, background (holes) 4-connected
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

# Variance of a uniform unit square, added along both ellipse axes
PIXEL_VARIANCE = 1.0 / 12.0


def keep_largest(mask):
    """
    Keep only the largest 8-connected foreground component

    Ties go to the component whose bounding box starts first in row-major order.

    Args:
        mask (numpy.ndarray): BinaryMask

    Returns:
        numpy.ndarray: BinaryMask with a single component
    """
    labels, count = ndimage.label(np.asarray(mask, dtype=bool), structure=EIGHT_CONNECTED)
    if count == 0:
        raise EmptyMask("keep_largest needs at least one foreground pixel")
    if count == 1:
        return labels == 1

    sizes = np.bincount(labels.ravel())[1:]
    boxes = ndimage.find_objects(labels)
    best = min(range(count), key=lambda i: (-sizes[i], boxes[i][0].start, boxes[i][1].start))
    return labels == best + 1


def fill_holes(mask):
    """
    Set every background region that cannot reach the image border (4-connected) to foreground
    """
    return ndimage.binary_fill_holes(np.asarray(mask, dtype=bool))


def distance_to_background(mask):
    """
    Euclidean distance from each foreground pixel to the nearest background pixel

    Pixels outside the raster count as background, so a shape touching the edge is
    at distance 1 there.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, mode="constant", constant_values=False)
    return ndimage.distance_transform_edt(padded)[1:-1, 1:-1]


def _squared(distance):
    # EDT distances are square roots of integers; rounding recovers them exactly
    return np.rint(distance * distance)


def erode_disc(mask, radius):
    """
    Erosion by the Euclidean disc {(dx, dy): dx^2 + dy^2 <= radius^2}
    """
    mask = np.asarray(mask, dtype=bool)
    if radius <= 0:
        return mask.copy()
    return _squared(distance_to_background(mask)) > radius * radius


def dilate_disc(mask, radius):
    """
    Dilation by the Euclidean disc {(dx, dy): dx^2 + dy^2 <= radius^2}
    """
    mask = np.asarray(mask, dtype=bool)
    if radius <= 0 or not mask.any():
        return mask.copy()
    return _squared(ndimage.distance_transform_edt(~mask)) <= radius * radius


def open_disc(mask, radius):
    """
    Morphological opening with a Euclidean disc structuring element
    """
    return dilate_disc(erode_disc(mask, radius), radius)


def smooth_edges(mask, open_radius=75, blur_size=21, threshold=0.5):
    """
    Smooth a disc boundary: opening, box blur, re-threshold

    Args:
        mask (numpy.ndarray): Disc mask at working-crop scale
        open_radius (int): Radius of the opening structuring element
        blur_size (int): Side of the normalized box kernel, edges replicated
        threshold (float): Blurred values strictly above this are kept

    Returns:
        numpy.ndarray: Smoothed BinaryMask
    """
    opened = open_disc(mask, open_radius).astype(np.float64)
    if blur_size > 1:
        opened = ndimage.uniform_filter(opened, size=blur_size, mode="nearest")
    smoothed = opened > threshold
    if not smoothed.any():
        raise EmptyMask(f"Edge smoothing removed the whole shape (opening radius {open_radius})")
    return smoothed


def centroid(mask):
    """
    Mean coordinate of the foreground pixels (pixel centres at integer coordinates)
    """
    ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
    if xs.size == 0:
        raise EmptyMask("centroid of an empty mask is undefined")
    return PointPx(x=float(xs.mean()), y=float(ys.mean()))


def fit_ellipse(mask):
    """
    Fit the ellipse with the same normalized second central moments as the pixel set

    Each pixel is treated as a unit square, which adds 1/12 to both variances.

    Args:
        mask (numpy.ndarray): BinaryMask with at least 5 pixels

    Returns:
        EllipseFit: Full axis lengths, orientation and eccentricity
    """
    mask = np.asarray(mask, dtype=bool)
    n = int(np.count_nonzero(mask))
    if n == 0:
        raise EmptyMask("Cannot fit an ellipse to an empty mask")
    if n < 5:
        raise DegenerateShape(f"Ellipse fit needs at least 5 pixels, got {n}")

    # Every foreground pixel in one region, connected or not
    region = measure.regionprops(mask.astype(np.uint8))[0]
    large, small = region.inertia_tensor_eigvals
    if large * small <= 1e-12 * (large + small) ** 2:
        raise DegenerateShape("Pixels are collinear; the fitted ellipse has zero width")

    major = 4.0 * math.sqrt(large + PIXEL_VARIANCE)
    minor = 4.0 * math.sqrt(small + PIXEL_VARIANCE)
    eccentricity = math.sqrt(max(0.0, 1.0 - (minor / major) ** 2))
    eccentricity = min(eccentricity, math.nextafter(1.0, 0.0))

    # inertia_tensor is [[var x, -cov], [-cov, var y]] with x along columns
    tensor = region.inertia_tensor
    uxx, uyy, uxy = tensor[0, 0], tensor[1, 1], -tensor[0, 1]
    orientation = math.degrees(0.5 * math.atan2(2.0 * uxy, uxx - uyy))
    if orientation <= -90.0:
        orientation += 180.0

    cy, cx = region.centroid
    return EllipseFit(
        center=PointPx(x=float(cx), y=float(cy)),
        major_axis_len=major,
        minor_axis_len=minor,
        orientation=orientation,
        eccentricity=eccentricity,
    )


def area(mask):
    return int(np.count_nonzero(mask))
