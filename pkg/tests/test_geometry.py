import numpy as np
import pytest

from src.core.config import LateralityRule
from src.core.errors import CoincidentPoints
from src.core.schemas import Laterality, PointPx
from src.processing.geometry import (
    axis_angle, axis_points_left, build_geometry, crop_about, crop_at, determine_laterality, inferior_angle_map,
    rotate_for_display, zone_angle_map, zone_angle_of,
)


def P(x, y):
    return PointPx(x=x, y=y)


@pytest.mark.parametrize("disc,fovea,expected", [
    ((0, 0), (10, 0), 0.0),
    ((0, 0), (0, 10), 90.0),
    ((100, 100), (50, 150), 135.0),
    ((0, 0), (-10, 0), 180.0),
    ((0, 0), (0, -10), -90.0),
])
def test_axis_angle(disc, fovea, expected):
    assert axis_angle(P(*disc), P(*fovea)) == pytest.approx(expected)


def test_axis_angle_of_coincident_points():
    with pytest.raises(CoincidentPoints):
        axis_angle(P(5, 5), P(5, 5))


def test_laterality_from_fovea_side():
    disc = P(1000, 1000)
    assert determine_laterality(disc, P(400, 1000)) == Laterality.OD
    assert determine_laterality(disc, P(1600, 1000)) == Laterality.OS
    assert determine_laterality(disc, P(1000, 400)) == Laterality.UNKNOWN


def test_laterality_rules_and_override():
    disc = P(1000, 1000)
    assert determine_laterality(disc, P(400, 1000), rule=LateralityRule.FOVEA_LEFT_IS_OS) == Laterality.OS
    assert determine_laterality(disc, P(400, 1000), rule=LateralityRule.MANIFEST_ONLY) == Laterality.UNKNOWN
    assert determine_laterality(disc, P(400, 1000), override=Laterality.OS) == Laterality.OS


def test_crop_interior_has_no_fill():
    image = np.full((2000, 2000, 3), 9, dtype=np.uint8)
    crop, origin = crop_about(image, P(1000, 1000), 650)
    assert crop.shape == (650, 650, 3)
    assert origin.as_tuple() == (675.0, 675.0)
    assert np.all(crop == 9)


def test_crop_near_left_edge_is_zero_filled():
    image = np.full((2000, 2000, 3), 9, dtype=np.uint8)
    crop, origin = crop_about(image, P(100, 1000), 650)
    assert origin.x == -225
    assert not crop[:, :225].any()
    assert np.all(crop[:, 225:] == 9)


def test_crop_area_is_window_intersection():
    mask = np.zeros((300, 300), dtype=bool)
    mask[0:100, 0:100] = True
    crop = crop_at(mask, -20, 50, 100)
    assert crop.sum() == 80 * 50


def test_crop_entirely_outside_is_empty():
    assert not crop_at(np.ones((10, 10), dtype=bool), 50, 50, 5).any()


def test_zone_angle_examples():
    center = P(100, 100)
    assert zone_angle_of(P(150, 100), center, 0) == pytest.approx(0)
    assert zone_angle_of(P(100, 150), center, 0) == pytest.approx(90)
    assert zone_angle_of(P(100, 50), center, 0) == pytest.approx(-90)
    assert zone_angle_of(P(50, 100), center, 0) == pytest.approx(180)
    along = P(100 + 40 * np.cos(np.radians(30)), 100 + 40 * np.sin(np.radians(30)))
    assert zone_angle_of(along, center, 30) == pytest.approx(0, abs=1e-9)


def test_zone_angle_of_the_centre():
    with pytest.raises(CoincidentPoints):
        zone_angle_of(P(3, 3), P(3, 3), 0)


def test_zone_angle_map_agrees_with_pointwise(rng):
    center = P(20.3, 17.8)
    for axis in (-170.0, -45.0, 0.0, 33.0, 180.0):
        angles = zone_angle_map((40, 50), center, axis)
        for _ in range(30):
            y, x = int(rng.integers(0, 40)), int(rng.integers(0, 50))
            assert angles[y, x] == pytest.approx(zone_angle_of(P(x, y), center, axis), abs=1e-9)
        assert angles.min() > -180.0
        assert angles.max() <= 180.0


def test_rotate_for_display_zero_is_identity():
    image = np.arange(75, dtype=np.uint8).reshape(5, 5, 3)
    assert np.array_equal(rotate_for_display(image, 0, P(2, 2)), image)


def test_rotate_for_display_brings_axis_to_horizontal():
    # Fovea straight below the disc ends up to its right
    image = np.zeros((101, 101), dtype=np.uint8)
    image[60, 50] = 255
    rotated = rotate_for_display(image, 90, P(50, 50))
    y, x = np.unravel_index(np.argmax(rotated), rotated.shape)
    assert abs(x - 60) <= 1 and abs(y - 50) <= 1


def test_rotation_round_trip():
    rows, cols = np.indices((120, 120))
    image = (127 + 100 * np.sin(rows / 15.0) * np.cos(cols / 20.0)).astype(np.uint8)
    center = P(60, 60)
    back = rotate_for_display(rotate_for_display(image, 25, center), -25, center)
    inner = (slice(35, 85), slice(35, 85))
    assert np.mean(np.abs(back[inner].astype(float) - image[inner].astype(float))) < 2


def test_build_geometry():
    geometry = build_geometry(P(1000, 1000), P(400, 1000), P(675, 675))
    assert geometry.axis_angle_deg == pytest.approx(180)
    assert geometry.laterality == Laterality.OD
    assert geometry.to_crop(P(1000, 1000)).as_tuple() == (325.0, 325.0)


def _wrapped_difference(a, b):
    return abs((a - b + 180.0) % 360.0 - 180.0)


def test_zone_angle_is_unchanged_by_rotating_pixel_and_fovea_together(rng):
    for _ in range(200):
        center = P(*rng.uniform(-50, 50, size=2))
        pixel = center.shifted(*rng.uniform(-80, 80, size=2))
        fovea = center.shifted(*rng.uniform(-300, 300, size=2))
        if pixel == center or fovea == center:
            continue
        alpha = float(rng.uniform(-180, 180))
        c, s = np.cos(np.radians(alpha)), np.sin(np.radians(alpha))

        def rotated(p):
            dx, dy = p.x - center.x, p.y - center.y
            return P(center.x + c * dx - s * dy, center.y + s * dx + c * dy)

        before = zone_angle_of(pixel, center, axis_angle(center, fovea))
        after = zone_angle_of(rotated(pixel), center, axis_angle(center, rotated(fovea)))
        assert _wrapped_difference(before, after) < 1e-9


def test_laterality_flips_under_horizontal_mirroring(rng):
    width = 3000
    for _ in range(200):
        disc = P(*rng.uniform(0, width, size=2))
        fovea = P(*rng.uniform(0, width, size=2))
        mirrored = determine_laterality(P(width - disc.x, disc.y), P(width - fovea.x, fovea.y))
        expected = {Laterality.OD: Laterality.OS, Laterality.OS: Laterality.OD,
                    Laterality.UNKNOWN: Laterality.UNKNOWN}
        assert mirrored == expected[determine_laterality(disc, fovea)]


@pytest.mark.parametrize("axis,left", [(0.0, False), (45.0, False), (90.0, False), (-90.0, False),
                                       (135.0, True), (180.0, True), (-170.0, True)])
def test_axis_points_left(axis, left):
    assert axis_points_left(axis) is left


@pytest.mark.parametrize("axis", [0.0, 30.0, 150.0, 180.0, -160.0])
def test_image_down_is_positive_whichever_way_the_fovea_lies(axis):
    center = P(50, 50)
    angles = inferior_angle_map((101, 101), center, axis)
    assert angles[90, 50] > 0
    assert angles[10, 50] < 0
    assert angles.min() > -180.0
    assert angles.max() <= 180.0
