import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import ndimage
from skimage import draw

from ..core.config import LateralityRule
from ..core.errors import InvalidScene, NoiseNotSupported
from ..core.schemas import ANGULAR_ZONES, PointPx, Zone
from ..processing.geometry import determine_laterality, inferior_angle_map
from ..processing.maskops import distance_to_background

logger = logging.getLogger(__name__)

Color = Tuple[int, int, int]

NASAL_ZONES = (Zone.N, Zone.NS, Zone.NI)


class Degradation(str, Enum):
    DARK = "DARK"
    ECCENTRIC = "ECCENTRIC"


class VesselStrip(BaseModel):
    """Straight vessel segment painted as an oriented rectangle"""
    model_config = ConfigDict(frozen=True)

    center: PointPx
    length: float = Field(..., gt=0)
    width: float = Field(..., gt=0)
    angle_deg: float = Field(0.0, description="Direction of the long side from +x, image coordinates")

    def corners(self):
        theta = math.radians(self.angle_deg)
        ux, uy = math.cos(theta), math.sin(theta)
        hx, hy = ux * self.length / 2, uy * self.length / 2
        wx, wy = -uy * self.width / 2, ux * self.width / 2
        cx, cy = self.center.x, self.center.y
        return [
            (cx - hx - wx, cy - hy - wy),
            (cx + hx - wx, cy + hy - wy),
            (cx + hx + wx, cy + hy + wy),
            (cx - hx + wx, cy - hy + wy),
        ]


class SynthScene(BaseModel):
    """
    Flat-colour fundus stand-in with known masks, fovea and pallor
    """
    model_config = ConfigDict(frozen=True)

    canvas_width: int = Field(650, ge=1)
    canvas_height: int = Field(650, ge=1)
    disc_center: PointPx = PointPx(x=325.0, y=325.0)
    disc_semi_major: float = Field(100.0, gt=0, description="Semi-axis along the orientation direction")
    disc_semi_minor: float = Field(100.0, gt=0)
    disc_orientation_deg: float = Field(0.0, description="Rotation of the semi-major axis, counter-clockwise on screen")
    band_color: Color = (200, 150, 100)
    nasal_band_color: Optional[Color] = Field(None, description="Band colour on the half facing away from the fovea")
    disc_core_color: Color = (210, 180, 130)
    background_color: Color = (150, 100, 60)
    vessel_color: Color = (110, 20, 20)
    axis_angle: float = Field(0.0, description="Direction from the disc centre to the fovea, degrees")
    fovea_distance: float = Field(250.0, gt=0)
    vessels: List[VesselStrip] = Field(default_factory=list)
    band_width: int = Field(30, ge=1)
    band_margin: int = Field(3, ge=0, description="Extra band-coloured depth on both sides of the band")
    crop_size: int = 650
    control_width: int = 50
    seed: int = 0
    noise_sd: float = Field(0.0, ge=0)

    @field_validator("band_color", "nasal_band_color", "disc_core_color", "background_color", "vessel_color")
    def color_in_range(cls, v):
        if v is not None and not all(0 <= c <= 255 for c in v):
            raise ValueError("Colour channels must lie in [0, 255]")
        return v

    @property
    def fovea(self):
        theta = math.radians(self.axis_angle)
        return PointPx(
            x=self.disc_center.x + self.fovea_distance * math.cos(theta),
            y=self.disc_center.y + self.fovea_distance * math.sin(theta),
        )

    @property
    def laterality(self):
        return determine_laterality(self.disc_center, self.fovea, LateralityRule.FOVEA_LEFT_IS_OD)

    def disc_extent(self):
        """Half width and half height of the disc's bounding box"""
        a, b = self.disc_semi_major, self.disc_semi_minor
        phi = math.radians(self.disc_orientation_deg)
        return (
            math.hypot(a * math.cos(phi), b * math.sin(phi)),
            math.hypot(a * math.sin(phi), b * math.cos(phi)),
        )


class SynthRender(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    image: np.ndarray
    disc_mask: np.ndarray
    vessel_mask: np.ndarray
    fovea: PointPx


def validate_scene(scene):
    """
    Reject scenes whose disc could reach the control frame or whose crop leaves the canvas
    """
    half = scene.crop_size // 2
    limit = half - scene.control_width - scene.band_margin - 1
    extent_x, extent_y = scene.disc_extent()
    if max(extent_x, extent_y) >= limit:
        raise InvalidScene(
            f"Disc extent {max(extent_x, extent_y):.1f} px reaches the control frame (limit {limit} px)"
        )

    cx = int(math.floor(scene.disc_center.x + 0.5))
    cy = int(math.floor(scene.disc_center.y + 0.5))
    if cx - half < 0 or cy - half < 0 or cx - half + scene.crop_size > scene.canvas_width \
            or cy - half + scene.crop_size > scene.canvas_height:
        raise InvalidScene("The working crop around the disc does not fit inside the canvas")
    if scene.band_margin * 2 >= scene.band_width:
        raise InvalidScene("band_margin must be less than half the band width")


def disc_mask_of(scene):
    shape = (scene.canvas_height, scene.canvas_width)
    mask = np.zeros(shape, dtype=bool)
    rr, cc = draw.ellipse(
        scene.disc_center.y,
        scene.disc_center.x,
        scene.disc_semi_minor,
        scene.disc_semi_major,
        shape=shape,
        rotation=math.radians(scene.disc_orientation_deg),
    )
    mask[rr, cc] = True
    return mask


def vessel_mask_of(scene):
    shape = (scene.canvas_height, scene.canvas_width)
    mask = np.zeros(shape, dtype=bool)
    for strip in scene.vessels:
        xs, ys = zip(*strip.corners())
        rr, cc = draw.polygon(ys, xs, shape=shape)
        mask[rr, cc] = True
    return mask


def band_paint_mask(scene, disc_mask):
    """
    Pixels painted with the band colour: the band widened by band_margin inwards and outwards
    """
    inner = scene.band_width + scene.band_margin
    inside = distance_to_background(disc_mask)
    outside = ndimage.distance_transform_edt(~disc_mask)
    return (disc_mask & (np.rint(inside * inside) <= inner * inner)) | (
        ~disc_mask & (np.rint(outside * outside) <= scene.band_margin ** 2)
    )


def nasal_half(scene, shape):
    """
    Pixels on the side of the disc facing away from the fovea, split like the zone partition
    """
    angles = inferior_angle_map(shape, scene.disc_center, scene.axis_angle)
    return (angles >= 90.0) | (angles < -90.0)


def render(scene):
    """
    Paint a scene and return its ground truth

    Args:
        scene (SynthScene): Scene description

    Returns:
        SynthRender: Image, disc mask, vessel mask and fovea in canvas coordinates
    """
    validate_scene(scene)
    shape = (scene.canvas_height, scene.canvas_width)

    disc = disc_mask_of(scene)
    if not disc.any():
        raise InvalidScene("The disc does not cover any pixel")
    vessels = vessel_mask_of(scene)
    band = band_paint_mask(scene, disc)

    image = np.empty(shape + (3,), dtype=np.uint8)
    image[...] = scene.background_color
    image[disc] = scene.disc_core_color
    image[band] = scene.band_color
    if scene.nasal_band_color is not None:
        image[band & nasal_half(scene, shape)] = scene.nasal_band_color
    image[vessels] = scene.vessel_color

    if scene.noise_sd > 0:
        rng = np.random.default_rng(scene.seed)
        noisy = image.astype(np.float64) + rng.normal(0.0, scene.noise_sd, image.shape)
        image = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)

    return SynthRender(image=image, disc_mask=disc, vessel_mask=vessels, fovea=scene.fovea)


def _ratio(color):
    return color[1] / color[0]


def expected_pallor(scene):
    """
    Analytic pallor per zone for a noise-free scene

    Returns:
        dict: Zone -> pallor; GLOBAL only when the band is one colour, WHOLE_DISC only when the
        core also shares that colour
    """
    if scene.noise_sd > 0:
        raise NoiseNotSupported("Analytic pallor is only defined for noise-free scenes")
    control = _ratio(scene.background_color)
    temporal = _ratio(scene.band_color) / control
    nasal = temporal if scene.nasal_band_color is None else _ratio(scene.nasal_band_color) / control

    expected: Dict[Zone, float] = {zone: (nasal if zone in NASAL_ZONES else temporal) for zone in ANGULAR_ZONES}
    if scene.nasal_band_color is None or tuple(scene.nasal_band_color) == tuple(scene.band_color):
        expected[Zone.GLOBAL] = temporal
        if tuple(scene.disc_core_color) == tuple(scene.band_color):
            expected[Zone.WHOLE_DISC] = temporal
    return expected


def degrade(scene, kind):
    """
    Derive a scene that fails one quality gate

    DARK scales every colour so the control median drops below 50 grey levels; ECCENTRIC
    stretches the disc to a 2:1 ellipse.
    """
    kind = Degradation(kind)
    if kind == Degradation.DARK:
        r, g, b = scene.background_color
        grey = 0.299 * r + 0.587 * g + 0.114 * b
        k = min(1.0, 45.0 / grey) if grey > 0 else 1.0

        def darker(color):
            return None if color is None else tuple(int(math.floor(c * k)) for c in color)

        return scene.model_copy(update={
            "band_color": darker(scene.band_color),
            "nasal_band_color": darker(scene.nasal_band_color),
            "disc_core_color": darker(scene.disc_core_color),
            "background_color": darker(scene.background_color),
            "vessel_color": darker(scene.vessel_color),
        })

    minor = min(scene.disc_semi_minor, 110.0)
    return scene.model_copy(update={"disc_semi_minor": minor, "disc_semi_major": 2.0 * minor})


def with_scaled_colors(scene, k):
    """
    Multiply every colour by k; the scaled channels must stay integral and unclipped
    """
    def scaled(color):
        if color is None:
            return None
        out = []
        for c in color:
            value = c * k
            if abs(value - round(value)) > 1e-9 or round(value) > 255:
                raise InvalidScene(f"Channel {c} scaled by {k} is not an exact 8-bit value")
            out.append(int(round(value)))
        return tuple(out)

    return scene.model_copy(update={
        "band_color": scaled(scene.band_color),
        "nasal_band_color": scaled(scene.nasal_band_color),
        "disc_core_color": scaled(scene.disc_core_color),
        "background_color": scaled(scene.background_color),
        "vessel_color": scaled(scene.vessel_color),
    })


def with_axis(scene, angle_deg):
    return scene.model_copy(update={"axis_angle": float(angle_deg)})


def pale_variant(scene, delta=0.2):
    """
    Raise the band's green/red ratio by delta, keeping red fixed
    """
    def paler(color):
        if color is None:
            return None
        r, g, b = color
        green = int(min(255, round(g + delta * r)))
        if green <= g:
            raise InvalidScene(f"Band colour {color} has no headroom to become paler")
        return (r, green, b)

    return scene.model_copy(update={
        "band_color": paler(scene.band_color),
        "nasal_band_color": paler(scene.nasal_band_color),
    })


def random_scene(rng, canvas=700, n_vessels=None):
    """
    Draw a valid noise-free scene with randomized disc, colours, axis and vessels

    Args:
        rng (numpy.random.Generator): Random source
        canvas (int): Side of the square canvas; leaves room for centroid rounding around the crop
        n_vessels (int): Number of vessel strips, random in [0, 3] when None

    Returns:
        SynthScene: A scene that passes validate_scene
    """
    semi_major = float(rng.uniform(110.0, 150.0))
    semi_minor = semi_major * float(rng.uniform(0.88, 1.0))
    slack = (canvas - 650) / 2
    center = PointPx(
        x=canvas / 2 + float(rng.uniform(-slack / 2, slack / 2)),
        y=canvas / 2 + float(rng.uniform(-slack / 2, slack / 2)),
    )

    red = int(rng.integers(140, 231))
    band = (red, int(rng.integers(60, red)), int(rng.integers(20, 101)))
    bg_red = int(rng.integers(100, 201))
    background = (bg_red, int(rng.integers(60, bg_red)), int(rng.integers(20, 81)))
    core = (min(255, band[0] + 20), min(255, band[1] + 30), band[2])

    if n_vessels is None:
        n_vessels = int(rng.integers(0, 4))
    vessels = [
        VesselStrip(
            center=center.shifted(float(rng.uniform(-40, 40)), float(rng.uniform(-40, 40))),
            length=2.2 * semi_major,
            width=float(rng.uniform(3.0, 8.0)),
            angle_deg=float(rng.uniform(-180.0, 180.0)),
        )
        for _ in range(n_vessels)
    ]

    return SynthScene(
        canvas_width=canvas,
        canvas_height=canvas,
        disc_center=center,
        disc_semi_major=semi_major,
        disc_semi_minor=semi_minor,
        disc_orientation_deg=float(rng.uniform(-90.0, 90.0)),
        band_color=band,
        disc_core_color=core,
        background_color=background,
        axis_angle=float(rng.uniform(-180.0, 180.0)),
        fovea_distance=float(rng.uniform(200.0, 300.0)),
        vessels=vessels,
    )
