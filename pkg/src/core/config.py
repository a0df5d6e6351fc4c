import logging
import os
from enum import Enum
from pathlib import Path
from typing import Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

# Path of a key=value configuration file, used when --config is not given
CONFIG_PATH = os.getenv("PALLOR_CONFIG")
LOG_LEVEL = os.getenv("PALLOR_LOG_LEVEL", "INFO")


class LateralityRule(str, Enum):
    FOVEA_LEFT_IS_OD = "fovea_left_is_od"
    FOVEA_LEFT_IS_OS = "fovea_left_is_os"
    MANIFEST_ONLY = "manifest_only"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ClaheConfig(_Section):
    tiles: int = Field(8, description="Number of tiles along each image axis")
    clip_limit: float = Field(0.01, description="Histogram clip limit as a fraction")

    @field_validator("tiles")
    def tiles_positive(cls, v):
        if v < 1:
            raise ValueError("clahe.tiles must be at least 1")
        return v

    @field_validator("clip_limit")
    def clip_in_range(cls, v):
        if not 0 < v <= 1:
            raise ValueError("clahe.clip_limit must lie in (0, 1]")
        return v


class SmoothConfig(_Section):
    open_radius: int = Field(75, description="Radius of the disc structuring element used for opening")
    blur_size: int = Field(21, description="Side of the normalized box blur kernel")
    threshold: float = Field(0.5, description="Blurred values above this are kept")

    @field_validator("open_radius", "blur_size")
    def non_negative(cls, v):
        if v < 0:
            raise ValueError("smoothing sizes must be non-negative")
        return v


class CropConfig(_Section):
    size: int = Field(650, description="Side of the square working crop centred on the disc")


class LateralityConfig(_Section):
    rule: LateralityRule = LateralityRule.FOVEA_LEFT_IS_OD


class BandConfig(_Section):
    width: int = Field(30, description="Depth of the measurement band inside the disc margin")


class ControlConfig(_Section):
    width: int = Field(50, description="Depth of the control frame inside the crop border")


class GateConfig(_Section):
    max_eccentricity: float = Field(0.65, description="Images with a more eccentric disc are rejected")
    min_brightness: float = Field(50.0, description="Images with a darker control region are rejected")

    @field_validator("max_eccentricity")
    def eccentricity_range(cls, v):
        if not 0 <= v < 1:
            raise ValueError("gates.max_eccentricity must lie in [0, 1)")
        return v

    @field_validator("min_brightness")
    def brightness_range(cls, v):
        if not 0 <= v <= 255:
            raise ValueError("gates.min_brightness must lie in [0, 255]")
        return v


class PipelineConfig(_Section):
    """
    Every tunable of the measurement pipeline, defaults as published
    """
    border_px: int = Field(300, description="Zero columns added to the left and right before resizing")
    target_height: int = Field(2166, description="Reference height every image is resized to")
    clahe: ClaheConfig = Field(default_factory=ClaheConfig)
    smooth: SmoothConfig = Field(default_factory=SmoothConfig)
    crop: CropConfig = Field(default_factory=CropConfig)
    laterality: LateralityConfig = Field(default_factory=LateralityConfig)
    band: BandConfig = Field(default_factory=BandConfig)
    control: ControlConfig = Field(default_factory=ControlConfig)
    gates: GateConfig = Field(default_factory=GateConfig)

    @field_validator("border_px")
    def border_non_negative(cls, v):
        if v < 0:
            raise ValueError("border_px must be non-negative")
        return v

    @field_validator("target_height")
    def height_positive(cls, v):
        if v <= 0:
            raise ValueError("target_height must be positive")
        return v

    @model_validator(mode="after")
    def control_fits_crop(self):
        if self.crop.size <= 2 * self.control.width:
            raise ValueError("crop.size must exceed twice control.width")
        return self

    def flat(self):
        """Dotted key=value view of the configuration, as written to run.json"""
        return _flatten(self.model_dump(mode="json"))


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    manifest: Path
    out_dir: Path
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    overlays: bool = False
    reference_stats: Optional[Path] = None
    jobs: int = Field(1, description="Number of images processed concurrently")

    @field_validator("jobs")
    def jobs_positive(cls, v):
        if v < 1:
            raise ValueError("jobs must be at least 1")
        return v


def _flatten(tree, prefix=""):
    flat = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _nest(flat):
    tree = {}
    for key, value in flat.items():
        parts = key.strip().split(".")
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"Configuration key '{key}' conflicts with a scalar key")
        node[parts[-1]] = value
    return tree


def build_pipeline_config(values=None):
    """
    Validate dotted key=value pairs into a PipelineConfig

    Args:
        values (dict): Mapping such as {"gates.max_eccentricity": "0.7"}

    Returns:
        PipelineConfig: The validated configuration
    """
    values = {k: v for k, v in (values or {}).items() if v is not None}
    try:
        return PipelineConfig.model_validate(_nest(values))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def load_pipeline_config(path=None, overrides=None):
    """
    Load the pipeline configuration from a key=value file plus explicit overrides

    Args:
        path (str): Configuration file; falls back to PALLOR_CONFIG
        overrides (dict): Dotted keys that take precedence over the file

    Returns:
        PipelineConfig: The validated configuration
    """
    path = path or CONFIG_PATH
    values = {}
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"Configuration file {path} does not exist")
        values.update(dotenv_values(path))
        logger.info("Loaded configuration from %s", path)
    values.update(overrides or {})
    return build_pipeline_config(values)
