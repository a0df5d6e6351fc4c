import logging

import numpy as np

from ..core.errors import ProvisionError
from ..core.schemas import PointPx, ProvisionFailure
from ..imgio.codec import read_mask
from ..processing.maskops import centroid
from ..processing.preprocess import to_preprocessed_frame, to_preprocessed_point
from .base import SegmentationProvider

logger = logging.getLogger(__name__)


class MaskFileProvider(SegmentationProvider):
    """
    Provider backed by sidecar mask files named in the manifest

    Masks may be sized for the original photograph or for the preprocessed frame; original-frame
    masks are padded and nearest-neighbour rescaled.
    """

    name = "mask_file"

    def __init__(self, threshold=128):
        self.threshold = threshold

    def _to_frame(self, mask, prep, label):
        original = (prep.original_height, prep.original_width)
        if mask.shape == (prep.height, prep.width):
            return mask
        if mask.shape == original:
            return to_preprocessed_frame(mask, prep)
        raise ProvisionError(
            ProvisionFailure.DIMENSION_MISMATCH,
            f"{label} mask is {mask.shape[1]}x{mask.shape[0]}, expected "
            f"{original[1]}x{original[0]} or {prep.width}x{prep.height}",
        )

    def _fovea(self, prep, entry):
        if entry.fovea_point is not None:
            x, y = entry.fovea_point
            return to_preprocessed_point(PointPx(x=x, y=y), prep)
        if entry.fovea_mask_path is None:
            raise ProvisionError(ProvisionFailure.FOVEA_NOT_FOUND, "no fovea point or fovea mask")

        mask = read_mask(entry.fovea_mask_path, self.threshold)
        if not mask.any():
            raise ProvisionError(ProvisionFailure.FOVEA_NOT_FOUND, "fovea mask is empty")
        if mask.shape == (prep.height, prep.width):
            return centroid(mask)
        if mask.shape == (prep.original_height, prep.original_width):
            return to_preprocessed_point(centroid(mask), prep)
        raise ProvisionError(ProvisionFailure.DIMENSION_MISMATCH, "fovea mask does not match the image size")

    def provide(self, prep, entry):
        if entry.disc_mask_path is None:
            raise ProvisionError(ProvisionFailure.DISC_NOT_FOUND, "no disc mask in the manifest")
        if entry.vessel_mask_path is None:
            raise ProvisionError(ProvisionFailure.VESSELS_NOT_FOUND, "no vessel mask in the manifest")

        disc = read_mask(entry.disc_mask_path, self.threshold)
        if not disc.any():
            raise ProvisionError(ProvisionFailure.DISC_NOT_FOUND, f"disc mask {entry.disc_mask_path} is empty")
        disc = self._to_frame(disc, prep, "disc")
        vessels = self._to_frame(read_mask(entry.vessel_mask_path, self.threshold), prep, "vessel")
        fovea = self._fovea(prep, entry)

        logger.debug("Loaded masks for %s: disc %d px, vessels %d px", entry.image_id,
                     int(np.count_nonzero(disc)), int(np.count_nonzero(vessels)))
        return self.finish(prep, disc, vessels, fovea)


def mask_file_provider(entry=None, threshold=128):
    """
    Build a mask-file provider

    Args:
        entry (ManifestEntry): Optional row checked up front for the sidecar columns it needs
        threshold (int): Grey level at or above which a mask pixel is foreground

    Returns:
        MaskFileProvider: Stateless provider usable for every entry of a manifest
    """
    if entry is not None:
        if entry.disc_mask_path is None:
            raise ProvisionError(ProvisionFailure.DISC_NOT_FOUND, f"{entry.image_id} has no disc mask")
        if entry.vessel_mask_path is None:
            raise ProvisionError(ProvisionFailure.VESSELS_NOT_FOUND, f"{entry.image_id} has no vessel mask")
        if entry.fovea_point is None and entry.fovea_mask_path is None:
            raise ProvisionError(ProvisionFailure.FOVEA_NOT_FOUND, f"{entry.image_id} has no fovea")
    return MaskFileProvider(threshold=threshold)
