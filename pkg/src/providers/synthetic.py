from ..processing.preprocess import to_preprocessed_frame, to_preprocessed_point
from ..synth.scenes import render
from .base import SegmentationProvider


class SyntheticProvider(SegmentationProvider):
    """
    Provider that returns a synthetic scene's exact ground truth

    The scene is rendered once; masks and fovea are mapped into the preprocessed frame
    the same way an original-frame sidecar mask would be.
    """

    name = "synthetic"

    def __init__(self, scene):
        self.scene = scene
        self.rendered = render(scene)

    def provide(self, prep, entry=None):
        return self.finish(
            prep,
            to_preprocessed_frame(self.rendered.disc_mask, prep),
            to_preprocessed_frame(self.rendered.vessel_mask, prep),
            to_preprocessed_point(self.rendered.fovea, prep),
        )


def synthetic_provider(scene):
    return SyntheticProvider(scene)
