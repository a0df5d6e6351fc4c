import logging

import numpy as np
import pytest

from src.core.errors import DegenerateRegion, DimensionMismatch, EmptyMask, PallorError
from src.core.schemas import SIX_ZONES, PointPx, Zone, ZonePartition
from src.processing.regions import (
    build_partition, check_partition, control_frame, exclude_vessels, measurement_band, partition_zones,
    whole_disc_region, zone_membership,
)
from tests.helpers import disc_mask

CENTER = PointPx(x=325.0, y=325.0)


def _radii(mask, center):
    rows, cols = np.nonzero(mask)
    return np.hypot(cols - center[0], rows - center[1])


def test_band_of_large_circle_is_annulus():
    band = measurement_band(disc_mask((500, 500), (250, 250), 200), 30)
    radii = _radii(band, (250, 250))
    assert radii.min() == pytest.approx(170, abs=1)
    assert radii.max() <= 200


def test_band_saturates_on_small_circle():
    small = disc_mask((100, 100), (50, 50), 20)
    assert np.array_equal(measurement_band(small, 30), small)


def test_band_of_square():
    square = np.zeros((140, 140), dtype=bool)
    square[20:120, 20:120] = True
    band = measurement_band(square, 30)
    assert band.sum() == 100 * 100 - 40 * 40
    assert band[20 + 29, 70] and not band[20 + 30, 70]


def test_band_of_empty_disc():
    with pytest.raises(EmptyMask):
        measurement_band(np.zeros((10, 10), dtype=bool))


def test_control_frame():
    frame = control_frame(650, 50)
    assert frame.sum() == 650 ** 2 - 550 ** 2 == 120000
    assert frame[0, 0]
    assert not frame[325, 325]
    assert not control_frame(650, 0).any()


def test_exclude_vessels():
    region = np.zeros((200, 200), dtype=bool)
    region[:100, :100] = True
    assert np.array_equal(exclude_vessels(region, np.zeros_like(region)), region)
    assert not exclude_vessels(region, np.ones_like(region)).any()

    vessels = np.zeros_like(region)
    vessels[:25, :] = True
    assert exclude_vessels(region, vessels).sum() == 7500

    with pytest.raises(DimensionMismatch):
        exclude_vessels(region, np.zeros((10, 10), dtype=bool))


@pytest.mark.parametrize("angle,zone", [
    (0.0, Zone.T),
    (44.999, Zone.T),
    (45.0, Zone.TI),
    (90.0, Zone.NI),
    (135.0, Zone.N),
    (180.0, Zone.N),
    (-135.0, Zone.NS),
    (-135.001, Zone.N),
    (-90.0, Zone.TS),
    (-45.0, Zone.T),
])
def test_zone_boundaries_are_half_open(angle, zone):
    angles = np.array([angle])
    hits = [z for z in SIX_ZONES if zone_membership(angles, z)[0]]
    assert hits == [zone]


def test_pmb_is_inside_temporal_zone():
    angles = np.array([-15.0, 0.0, 14.999, 15.0])
    assert zone_membership(angles, Zone.PMB).tolist() == [True, True, True, False]


def test_pixel_on_the_axis_is_temporal_and_pmb():
    band = np.zeros((650, 650), dtype=bool)
    band[325, 400] = True
    partition = partition_zones(band, CENTER, 0.0)
    assert partition.zone_masks[Zone.T][325, 400]
    assert partition.zone_masks[Zone.PMB][325, 400]


def test_inferior_zones_lie_below_the_disc_on_either_side():
    # Fovea to the right (axis 0) and to the left (axis 180); the pixel is below the disc on the fovea side
    right = np.zeros((650, 650), dtype=bool)
    right[400, 340] = True
    assert partition_zones(right, CENTER, 0.0).zone_masks[Zone.TI][400, 340]
    left = np.zeros((650, 650), dtype=bool)
    left[400, 310] = True
    assert partition_zones(left, CENTER, 180.0).zone_masks[Zone.TI][400, 310]

    above = np.zeros((650, 650), dtype=bool)
    above[250, 310] = True
    assert partition_zones(above, CENTER, 180.0).zone_masks[Zone.TS][250, 310]


def test_annulus_zone_areas_follow_angular_widths():
    outer = disc_mask((650, 650), (325, 325), 150)
    inner = disc_mask((650, 650), (325, 325), 100)
    band = outer & ~inner
    partition = partition_zones(band, CENTER, 17.0)
    total = band.sum()
    widths = {Zone.T: 90, Zone.TI: 45, Zone.NI: 45, Zone.N: 90, Zone.NS: 45, Zone.TS: 45, Zone.PMB: 30}
    for zone, width in widths.items():
        assert partition.zone_masks[zone].sum() / total == pytest.approx(width / 360, rel=0.02)
    check_partition(partition)


def test_build_partition_regions():
    disc = disc_mask((650, 650), (325, 325), 100)
    partition = build_partition(disc, np.zeros_like(disc), CENTER, 30.0)
    check_partition(partition)
    assert partition.control.sum() == 120000
    assert np.array_equal(partition.whole_disc, disc)
    assert np.array_equal(partition.band, measurement_band(disc, 30))
    assert partition.control_overlap == 0


def test_control_overlap_is_removed(caplog):
    disc = disc_mask((650, 650), (325, 325), 300)
    with caplog.at_level(logging.WARNING):
        partition = build_partition(disc, np.zeros_like(disc), CENTER, 0.0)
    assert not (partition.control & disc).any()
    assert partition.control.sum() < 120000
    assert partition.control_overlap == int((control_frame(650, 50) & disc).sum()) > 0
    assert "control frame" in caplog.text


def test_vessels_over_the_whole_band():
    disc = disc_mask((650, 650), (325, 325), 100)
    with pytest.raises(DegenerateRegion):
        build_partition(disc, disc.copy(), CENTER, 0.0)


def test_vessels_over_one_zone_empty_only_that_zone():
    disc = disc_mask((650, 650), (325, 325), 100)
    vessels = np.zeros_like(disc)
    vessels[:, 390:] = True
    partition = build_partition(disc, vessels, CENTER, 0.0)
    assert not partition.zone_masks[Zone.PMB].any()
    assert partition.zone_masks[Zone.N].any()
    check_partition(partition)


def test_whole_disc_region():
    disc = np.zeros((100, 100), dtype=bool)
    disc[:, :50] = True
    assert np.array_equal(whole_disc_region(disc, np.zeros_like(disc)), disc)

    vessels = np.zeros_like(disc)
    vessels[:30, :] = True
    assert whole_disc_region(disc, vessels).sum() / disc.sum() == pytest.approx(0.70, abs=0.01)

    with pytest.raises(DegenerateRegion):
        whole_disc_region(disc, disc.copy())


def test_check_partition_rejects_overlap():
    band = np.ones((4, 4), dtype=bool)
    masks = {zone: np.zeros_like(band) for zone in SIX_ZONES + (Zone.PMB,)}
    masks[Zone.T] = band.copy()
    masks[Zone.N] = band.copy()
    with pytest.raises(PallorError):
        check_partition(ZonePartition(band=band, zone_masks=masks))


def test_check_partition_rejects_pmb_outside_t():
    band = np.ones((4, 4), dtype=bool)
    masks = {zone: np.zeros_like(band) for zone in SIX_ZONES + (Zone.PMB,)}
    masks[Zone.N] = band.copy()
    masks[Zone.PMB][0, 0] = True
    with pytest.raises(PallorError):
        check_partition(ZonePartition(band=band, zone_masks=masks))
