import numpy as np
import pytest

from src.synth.scenes import SynthScene


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def flat_scene():
    """650x650 scene: band G/R 0.75, background G/R 2/3, no vessels"""
    return SynthScene()
