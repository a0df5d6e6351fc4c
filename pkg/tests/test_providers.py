import numpy as np
import pytest

from src.core.errors import ProvisionError
from src.core.schemas import ManifestEntry, PointPx, ProvisionFailure
from src.imgio.codec import write_png
from src.processing.preprocess import pad_sides, preprocess
from src.providers.base import SegmentationProvider
from src.providers.mask_file import MaskFileProvider, mask_file_provider
from src.providers.synthetic import synthetic_provider
from tests.helpers import disc_mask


def _entry(tmp_path, **masks):
    paths = {}
    for column, mask in masks.items():
        paths[column] = str(write_png(tmp_path / f"{column}.png", mask))
    return ManifestEntry(image_path=str(tmp_path / "image.png"), image_id="image", **paths)


def test_fovea_from_mask_centroid(tmp_path):
    shape = (1400, 1200)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=0, target_h=1400)
    entry = _entry(
        tmp_path,
        disc_mask_path=disc_mask(shape, (400, 600), 120),
        vessel_mask_path=np.zeros(shape, dtype=bool),
        fovea_mask_path=disc_mask(shape, (800, 1000), 150),
    )

    output = mask_file_provider(entry).provide(prep, entry)

    assert output.fovea.x == pytest.approx(800, abs=0.5)
    assert output.fovea.y == pytest.approx(1000, abs=0.5)
    assert output.disc_mask.shape == shape


def test_fovea_mask_in_original_frame_is_mapped(tmp_path):
    shape = (1400, 1200)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=300, target_h=700)
    entry = _entry(
        tmp_path,
        disc_mask_path=disc_mask(shape, (400, 600), 120),
        vessel_mask_path=np.zeros(shape, dtype=bool),
        fovea_mask_path=disc_mask(shape, (800, 1000), 150),
    )

    output = MaskFileProvider().provide(prep, entry)

    assert output.fovea.x == pytest.approx((800 + 300) * 0.5, abs=0.5)
    assert output.fovea.y == pytest.approx(500, abs=0.5)
    assert output.disc_mask.shape == (700, 900)


def test_original_frame_masks_are_rescaled(tmp_path):
    shape = (400, 300)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=300, target_h=800)
    disc = disc_mask(shape, (150, 200), 50)
    vessels = np.zeros(shape, dtype=bool)
    vessels[190:210, :] = True
    entry = _entry(tmp_path, disc_mask_path=disc, vessel_mask_path=vessels)
    entry = entry.model_copy(update={"fovea_point": (150.0, 350.0)})

    output = MaskFileProvider().provide(prep, entry)

    assert output.disc_mask.shape == (800, 1800)
    assert output.disc_mask.sum() == pytest.approx(disc.sum() * prep.scale_factor ** 2, rel=0.05)
    assert output.vessel_mask.sum() == pytest.approx(vessels.sum() * 4, rel=0.05)
    assert output.fovea.as_tuple() == (900.0, 700.0)


def test_preprocessed_frame_masks_pass_through(tmp_path):
    shape = (400, 300)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=300, target_h=400)
    disc = pad_sides(disc_mask(shape, (150, 200), 50), 300)
    entry = _entry(tmp_path, disc_mask_path=disc, vessel_mask_path=np.zeros_like(disc))
    entry = entry.model_copy(update={"fovea_point": (20.0, 30.0)})

    output = MaskFileProvider().provide(prep, entry)

    assert np.array_equal(output.disc_mask, disc)
    assert output.fovea.as_tuple() == (320.0, 30.0)


def test_black_vessel_mask_gives_empty_vessels(tmp_path):
    shape = (200, 200)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=0, target_h=200)
    entry = _entry(tmp_path, disc_mask_path=disc_mask(shape, (100, 100), 40),
                   vessel_mask_path=np.zeros(shape, dtype=np.uint8))
    entry = entry.model_copy(update={"fovea_point": (10.0, 100.0)})

    output = MaskFileProvider().provide(prep, entry)

    assert not output.vessel_mask.any()


def test_empty_disc_mask(tmp_path):
    shape = (50, 50)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=0, target_h=50)
    entry = _entry(tmp_path, disc_mask_path=np.zeros(shape, dtype=bool),
                   vessel_mask_path=np.zeros(shape, dtype=bool))
    entry = entry.model_copy(update={"fovea_point": (1.0, 1.0)})

    with pytest.raises(ProvisionError) as info:
        MaskFileProvider().provide(prep, entry)
    assert info.value.failure == ProvisionFailure.DISC_NOT_FOUND


def test_missing_fovea(tmp_path):
    shape = (50, 50)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=0, target_h=50)
    entry = _entry(tmp_path, disc_mask_path=disc_mask(shape, (25, 25), 10),
                   vessel_mask_path=np.zeros(shape, dtype=bool))

    with pytest.raises(ProvisionError) as info:
        MaskFileProvider().provide(prep, entry)
    assert info.value.failure == ProvisionFailure.FOVEA_NOT_FOUND

    with pytest.raises(ProvisionError) as info:
        mask_file_provider(entry)
    assert info.value.failure == ProvisionFailure.FOVEA_NOT_FOUND


def test_missing_vessel_mask(tmp_path):
    shape = (50, 50)
    prep = preprocess(np.zeros(shape + (3,), dtype=np.uint8), border_px=0, target_h=50)
    entry = _entry(tmp_path, disc_mask_path=disc_mask(shape, (25, 25), 10))
    entry = entry.model_copy(update={"fovea_point": (1.0, 1.0)})

    with pytest.raises(ProvisionError) as info:
        MaskFileProvider().provide(prep, entry)
    assert info.value.failure == ProvisionFailure.VESSELS_NOT_FOUND


def test_mask_of_foreign_size(tmp_path):
    prep = preprocess(np.zeros((50, 50, 3), dtype=np.uint8), border_px=10, target_h=100)
    entry = _entry(tmp_path, disc_mask_path=disc_mask((33, 33), (16, 16), 10),
                   vessel_mask_path=np.zeros((33, 33), dtype=bool))
    entry = entry.model_copy(update={"fovea_point": (1.0, 1.0)})

    with pytest.raises(ProvisionError) as info:
        MaskFileProvider().provide(prep, entry)
    assert info.value.failure == ProvisionFailure.DIMENSION_MISMATCH


def test_synthetic_provider_returns_ground_truth(flat_scene):
    provider = synthetic_provider(flat_scene)
    prep = preprocess(provider.rendered.image, border_px=300, target_h=650)

    output = provider.provide(prep)

    assert np.array_equal(output.disc_mask, pad_sides(provider.rendered.disc_mask, 300))
    assert output.fovea.as_tuple() == (325.0 + 250.0 + 300.0, 325.0)


def test_finish_checks_masks_against_the_frame():
    prep = preprocess(np.zeros((40, 40, 3), dtype=np.uint8), border_px=0, target_h=40)
    disc = disc_mask((40, 40), (20, 20), 8).astype(np.uint8) * 255
    output = SegmentationProvider.finish(prep, disc, np.zeros((40, 40)), PointPx(x=5, y=5))
    assert output.disc_mask.dtype == bool
    assert output.disc_mask.sum() == disc_mask((40, 40), (20, 20), 8).sum()

    with pytest.raises(ProvisionError) as info:
        SegmentationProvider.finish(prep, np.zeros((40, 40, 3)), np.zeros((40, 40)), PointPx(x=5, y=5))
    assert info.value.failure == ProvisionFailure.DIMENSION_MISMATCH

    with pytest.raises(ProvisionError) as info:
        SegmentationProvider.finish(prep, np.zeros((40, 40)), np.zeros((40, 40)), PointPx(x=5, y=5))
    assert info.value.failure == ProvisionFailure.DISC_NOT_FOUND
