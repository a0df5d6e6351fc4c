import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import InvalidDimensions

# Rasters are plain numpy arrays, row-major with the origin at the top-left:
#   FundusImage  uint8   (height, width, 3)  red, green, blue
#   GrayImage    float64 (height, width)
#   BinaryMask   bool    (height, width)
# x runs rightward along columns, y runs downward along rows.
FundusImage = np.ndarray
GrayImage = np.ndarray
BinaryMask = np.ndarray


def as_fundus_image(array):
    """
    Validate and normalize an array into a FundusImage

    Args:
        array (numpy.ndarray): Candidate raster

    Returns:
        numpy.ndarray: uint8 array of shape (height, width, 3)
    """
    array = np.asarray(array)
    if array.ndim != 3 or array.shape[2] != 3:
        raise InvalidDimensions(f"Expected a (height, width, 3) raster, got shape {array.shape}")
    if array.shape[0] == 0 or array.shape[1] == 0:
        raise InvalidDimensions("Image dimensions must be positive")
    if array.dtype != np.uint8:
        if np.issubdtype(array.dtype, np.floating) and not np.all(np.isfinite(array)):
            raise InvalidDimensions("Image intensities must be finite")
        array = np.clip(np.rint(array), 0, 255).astype(np.uint8)
    return array


def as_mask(array, shape=None):
    """
    Validate an array as a BinaryMask, optionally checking it matches a raster shape
    """
    mask = np.asarray(array).astype(bool, copy=False)
    if mask.ndim != 2:
        raise InvalidDimensions(f"Expected a 2-D mask, got shape {mask.shape}")
    if shape is not None and mask.shape != tuple(shape[:2]):
        raise InvalidDimensions(f"Mask shape {mask.shape} does not match raster shape {tuple(shape[:2])}")
    return mask


class Zone(str, Enum):
    """Angular zones of the measurement band plus the two aggregate regions"""
    T = "T"
    TS = "TS"
    NS = "NS"
    N = "N"
    NI = "NI"
    TI = "TI"
    PMB = "PMB"
    GLOBAL = "GLOBAL"
    WHOLE_DISC = "WHOLE_DISC"


# The six zones that tile the full circle
SIX_ZONES: Tuple[Zone, ...] = (Zone.T, Zone.TS, Zone.NS, Zone.N, Zone.NI, Zone.TI)
ANGULAR_ZONES: Tuple[Zone, ...] = SIX_ZONES + (Zone.PMB,)
# Column order used by pallor.csv
CSV_ZONE_ORDER: Tuple[Zone, ...] = (Zone.T, Zone.TI, Zone.NI, Zone.N, Zone.NS, Zone.TS, Zone.PMB)
IOPV_ZONE_ORDER: Tuple[Zone, ...] = (Zone.T, Zone.TI, Zone.NI, Zone.N, Zone.NS, Zone.TS)


class Laterality(str, Enum):
    OD = "OD"
    OS = "OS"
    UNKNOWN = "UNKNOWN"


class Status(str, Enum):
    OK = "OK"
    REJECTED = "REJECTED"
    FAILED = "FAILED"


class QualityReason(str, Enum):
    HIGH_ECCENTRICITY = "HIGH_ECCENTRICITY"
    LOW_LUMINANCE = "LOW_LUMINANCE"
    DISC_NOT_FOUND = "DISC_NOT_FOUND"
    FOVEA_NOT_FOUND = "FOVEA_NOT_FOUND"
    DEGENERATE_REGION = "DEGENERATE_REGION"
    DISC_IN_CONTROL_FRAME = "DISC_IN_CONTROL_FRAME"


class ProvisionFailure(str, Enum):
    DISC_NOT_FOUND = "DISC_NOT_FOUND"
    FOVEA_NOT_FOUND = "FOVEA_NOT_FOUND"
    VESSELS_NOT_FOUND = "VESSELS_NOT_FOUND"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"


class PointPx(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="Column coordinate, rightward, subpixel allowed")
    y: float = Field(..., description="Row coordinate, downward, subpixel allowed")

    @field_validator("x", "y")
    def must_be_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("Point coordinates must be finite")
        return v

    def shifted(self, dx, dy):
        return PointPx(x=self.x + dx, y=self.y + dy)

    def as_tuple(self):
        return (self.x, self.y)


class EllipseFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: PointPx = Field(..., description="Centroid of the fitted pixel set")
    major_axis_len: float = Field(..., description="Full major axis length in pixels")
    minor_axis_len: float = Field(..., description="Full minor axis length in pixels")
    orientation: float = Field(..., description="Angle of the major axis from +x in image coordinates, degrees in (-90, 90]")
    eccentricity: float = Field(..., description="sqrt(1 - (minor/major)^2), 0 for a circle")

    @model_validator(mode="after")
    def check_axes(self):
        if not (self.major_axis_len >= self.minor_axis_len > 0):
            raise ValueError("Ellipse axes must satisfy major >= minor > 0")
        if not (0.0 <= self.eccentricity < 1.0):
            raise ValueError("Eccentricity must lie in [0, 1)")
        return self


class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    image_path: str = Field(..., description="Path of the fundus photograph")
    image_id: str = Field(..., description="Unique id of the image, defaults to the file stem")
    subject_id: str = Field("", description="Participant id used to pair left and right eyes")
    disc_mask_path: Optional[str] = Field(None, description="Disc mask sidecar file")
    vessel_mask_path: Optional[str] = Field(None, description="Vessel mask sidecar file")
    fovea_point: Optional[Tuple[float, float]] = Field(None, description="Fovea (x, y) in the original image frame")
    fovea_mask_path: Optional[str] = Field(None, description="Fovea mask sidecar file")
    expected_laterality: Optional[Laterality] = Field(None, description="Eye override from the manifest")
    dataset: str = Field("", description="Free text dataset label used for robustness reporting")

    @field_validator("image_path")
    def image_path_not_empty(cls, v):
        if not v or not v.strip():
            raise ValueError("image_path must not be empty")
        return v


class PreprocessedImage(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    image: np.ndarray = Field(..., description="Padded and resized FundusImage")
    scale_factor: float = Field(..., description="Resized height divided by original height")
    pad_px: int = Field(..., description="Zero columns added to each side before resizing")
    original_width: int = Field(..., description="Width of the decoded image before padding")
    original_height: int = Field(..., description="Height of the decoded image before padding")

    @field_validator("scale_factor")
    def scale_must_be_positive(cls, v):
        if v <= 0:
            raise ValueError("scale_factor must be positive")
        return v

    @property
    def height(self):
        return self.image.shape[0]

    @property
    def width(self):
        return self.image.shape[1]


class ProviderOutput(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    disc_mask: np.ndarray = Field(..., description="Disc membership in the preprocessed frame")
    vessel_mask: np.ndarray = Field(..., description="Vessel membership in the preprocessed frame")
    fovea: PointPx = Field(..., description="Fovea in the preprocessed frame")


class DiscGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    disc_center: PointPx = Field(..., description="Disc centroid in the preprocessed frame")
    fovea: PointPx = Field(..., description="Fovea in the preprocessed frame")
    axis_angle_deg: float = Field(..., description="Direction of disc to fovea, degrees in (-180, 180]")
    laterality: Laterality
    crop_origin: PointPx = Field(..., description="Top-left of the working crop in the preprocessed frame")
    crop_size: int = Field(650, description="Side of the square working crop")

    def to_crop(self, point):
        return point.shifted(-self.crop_origin.x, -self.crop_origin.y)


class ZonePartition(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    band: np.ndarray = Field(..., description="Vessel-excluded measurement band, crop frame")
    zone_masks: Dict[Zone, np.ndarray] = Field(..., description="Masks for T, TS, NS, N, NI, TI and PMB")
    control: Optional[np.ndarray] = Field(None, description="Vessel-excluded control frame")
    whole_disc: Optional[np.ndarray] = Field(None, description="Vessel-excluded disc")
    control_overlap: int = Field(0, description="Disc pixels that fell inside the control frame")


class ChannelStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean_R: float
    mean_G: float
    median_R: float
    median_G: float
    n: int = Field(..., description="Number of sampled pixels")

    @field_validator("n")
    def sample_not_empty(cls, v):
        if v <= 0:
            raise ValueError("ChannelStats requires at least one pixel")
        return v


class PallorRecord(BaseModel):
    """One result row per processed image"""
    model_config = ConfigDict(frozen=True)

    image_id: str
    subject_id: str = ""
    laterality: Laterality = Laterality.UNKNOWN
    status: Status = Status.OK
    reject_reason: str = ""
    reasons: List[QualityReason] = Field(default_factory=list)
    pallor_T: Optional[float] = None
    pallor_TS: Optional[float] = None
    pallor_NS: Optional[float] = None
    pallor_N: Optional[float] = None
    pallor_NI: Optional[float] = None
    pallor_TI: Optional[float] = None
    pallor_PMB: Optional[float] = None
    pallor_global: Optional[float] = None
    pallor_whole_disc: Optional[float] = None
    nt_ratio: Optional[float] = None
    missing_zones: List[Zone] = Field(default_factory=list, description="Zones left empty by vessel exclusion")
    disc_area: Optional[int] = Field(None, description="Post-processed disc pixel count")
    eccentricity: Optional[float] = None
    control_brightness: Optional[float] = Field(None, description="Median grey level of the control region")
    proc_time_ms: float = 0.0
    source_format: str = ""
    dataset: str = ""

    @model_validator(mode="after")
    def check_status(self):
        if self.status != Status.OK and not self.reject_reason:
            raise ValueError("Records that are not OK must carry a reject_reason")
        if self.status == Status.OK:
            for zone, field in _ZONE_FIELD.items():
                value = getattr(self, field)
                if value is not None and not (math.isfinite(value) and value > 0):
                    raise ValueError(f"OK records need finite positive pallor, {zone.value} is {value}")
        return self

    def pallor_of(self, zone):
        return getattr(self, _ZONE_FIELD[Zone(zone)])


_ZONE_FIELD = {
    Zone.T: "pallor_T",
    Zone.TS: "pallor_TS",
    Zone.NS: "pallor_NS",
    Zone.N: "pallor_N",
    Zone.NI: "pallor_NI",
    Zone.TI: "pallor_TI",
    Zone.PMB: "pallor_PMB",
    Zone.GLOBAL: "pallor_global",
    Zone.WHOLE_DISC: "pallor_whole_disc",
}


def zone_field(zone):
    """Name of the PallorRecord attribute holding a zone's pallor"""
    return _ZONE_FIELD[Zone(zone)]


class IoPVRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    subject_id: str
    differences: Dict[Zone, float] = Field(..., description="Absolute left/right difference per zone")
    iopv: float = Field(..., description="Sum of the six zone differences")
    d_global: Optional[float] = Field(None, description="Absolute difference of global pallor")

    @field_validator("iopv")
    def iopv_non_negative(cls, v):
        if v < 0:
            raise ValueError("iopv must be non-negative")
        return v


class QualityVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: Status
    reasons: List[QualityReason] = Field(default_factory=list)

    @model_validator(mode="after")
    def ok_iff_no_reasons(self):
        if (self.status == Status.OK) != (len(self.reasons) == 0):
            raise ValueError("A verdict is OK exactly when it carries no reasons")
        return self

    @property
    def reason_text(self):
        return ";".join(r.value for r in self.reasons)


class OneRBin(str, Enum):
    Q25 = "Q25"
    Q50 = "Q50"
    R1 = "R1"
    FAIL = "FAIL"


class OneRScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    within_025R: float = Field(..., description="Fraction of predictions within 0.25 R")
    within_05R: float = Field(..., description="Fraction of predictions within 0.5 R")
    within_1R: float = Field(..., description="Fraction of predictions within 1 R")
    failure: float = Field(..., description="Fraction of predictions beyond 1 R")
