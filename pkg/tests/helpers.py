import numpy as np

from src.core.config import PipelineConfig
from src.core.schemas import ManifestEntry


def config_for(height, **kwargs):
    """Pipeline settings that keep a synthetic canvas at scale 1"""
    return PipelineConfig(target_height=height, **kwargs)


def entry_for(image_id, subject_id="", **kwargs):
    return ManifestEntry(image_path=f"{image_id}.png", image_id=image_id, subject_id=subject_id, **kwargs)


def disc_mask(shape, center, radius):
    """Pixels whose centre lies within `radius` of center=(x, y)"""
    rows, cols = np.indices(shape)
    return (cols - center[0]) ** 2 + (rows - center[1]) ** 2 <= radius ** 2
