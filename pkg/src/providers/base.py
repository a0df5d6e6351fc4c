from abc import ABC, abstractmethod

from ..core.errors import InvalidDimensions, ProvisionError
from ..core.schemas import ProviderOutput, ProvisionFailure, as_mask


class SegmentationProvider(ABC):
    """
    Source of the disc mask, vessel mask and fovea for a preprocessed image

    Implementations hold no per-image state, so one instance can serve every worker of a batch.
    """

    name = "provider"

    @abstractmethod
    def provide(self, prep, entry):
        """
        Produce the segmentation bundle for one image

        Args:
            prep (PreprocessedImage): Padded and resized image
            entry (ManifestEntry): Manifest row describing the image

        Returns:
            ProviderOutput: Masks and fovea in the preprocessed frame

        Raises:
            ProvisionError: When any part of the bundle cannot be produced
        """

    @staticmethod
    def finish(prep, disc_mask, vessel_mask, fovea):
        """
        Check a bundle against the preprocessed frame and wrap it
        """
        shape = (prep.height, prep.width)
        masks = {}
        for label, mask in (("disc", disc_mask), ("vessel", vessel_mask)):
            try:
                masks[label] = as_mask(mask, shape)
            except InvalidDimensions as e:
                raise ProvisionError(ProvisionFailure.DIMENSION_MISMATCH, f"{label} mask: {e}") from e
        if not masks["disc"].any():
            raise ProvisionError(ProvisionFailure.DISC_NOT_FOUND, "disc mask is empty")
        return ProviderOutput(disc_mask=masks["disc"], vessel_mask=masks["vessel"], fovea=fovea)
