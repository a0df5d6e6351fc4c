import logging

import numpy as np

from ..core.errors import DegenerateRegion, DimensionMismatch, EmptyMask, PallorError
from ..core.schemas import SIX_ZONES, ZonePartition, Zone
from .geometry import inferior_angle_map
from .maskops import distance_to_background

logger = logging.getLogger(__name__)

# Half-open [low, high) intervals of the zone angle; N wraps through 180
ZONE_INTERVALS = {
    Zone.T: ((-45.0, 45.0),),
    Zone.TI: ((45.0, 90.0),),
    Zone.NI: ((90.0, 135.0),),
    Zone.N: ((135.0, np.inf), (-180.0, -135.0)),
    Zone.NS: ((-135.0, -90.0),),
    Zone.TS: ((-90.0, -45.0),),
    Zone.PMB: ((-15.0, 15.0),),
}


def measurement_band(disc_mask, width=30):
    """
    Strip of the disc within a Euclidean distance of `width` from its margin

    Args:
        disc_mask (numpy.ndarray): Post-processed disc mask
        width (int): Band depth in pixels

    Returns:
        numpy.ndarray: BinaryMask, the whole disc when it is thinner than the band
    """
    disc_mask = np.asarray(disc_mask, dtype=bool)
    if not disc_mask.any():
        raise EmptyMask("Cannot build a measurement band from an empty disc")
    distance = distance_to_background(disc_mask)
    return disc_mask & (np.rint(distance * distance) <= width * width)


def control_frame(crop_size=650, width=50):
    """
    Frame of pixels within `width` of any edge of the square crop
    """
    frame = np.zeros((crop_size, crop_size), dtype=bool)
    if width <= 0:
        return frame
    frame[:width, :] = True
    frame[-width:, :] = True
    frame[:, :width] = True
    frame[:, -width:] = True
    return frame


def exclude_vessels(region, vessel_mask):
    """
    Remove vessel pixels from a region; removed pixels leave the sample entirely
    """
    region = np.asarray(region, dtype=bool)
    vessel_mask = np.asarray(vessel_mask, dtype=bool)
    if region.shape != vessel_mask.shape:
        raise DimensionMismatch(f"Region {region.shape} and vessel mask {vessel_mask.shape} differ in size")
    return region & ~vessel_mask


def zone_membership(angles, zone):
    member = np.zeros(angles.shape, dtype=bool)
    for low, high in ZONE_INTERVALS[Zone(zone)]:
        member |= (angles >= low) & (angles < high)
    return member


def partition_zones(band, disc_center, axis_angle_deg):
    """
    Split the measurement band into the angular zones

    Args:
        band (numpy.ndarray): Measurement band, crop frame
        disc_center (PointPx): Disc centre, crop frame
        axis_angle_deg (float): Disc-fovea axis direction; inferior zones always lie image-down

    Returns:
        ZonePartition: Band plus masks for T, TS, NS, N, NI, TI and PMB
    """
    band = np.asarray(band, dtype=bool)
    if not band.any():
        raise EmptyMask("Cannot partition an empty measurement band")

    angles = inferior_angle_map(band.shape, disc_center, axis_angle_deg)
    zone_masks = {zone: band & zone_membership(angles, zone) for zone in ZONE_INTERVALS}
    return ZonePartition(band=band, zone_masks=zone_masks)


def whole_disc_region(disc_mask, vessel_mask):
    """
    Disc minus vessels
    """
    disc_mask = np.asarray(disc_mask, dtype=bool)
    if not disc_mask.any():
        raise EmptyMask("The disc mask is empty")
    region = exclude_vessels(disc_mask, vessel_mask)
    if not region.any():
        raise DegenerateRegion("Vessels cover the whole disc")
    return region


def build_partition(disc_mask, vessel_mask, disc_center, axis_angle_deg, band_width=30, control_width=50):
    """
    Build every measured region of a working crop

    Returns:
        ZonePartition: Vessel-excluded band, zones, control frame and whole disc; control_overlap
        counts the disc pixels that reached into the control frame
    """
    disc_mask = np.asarray(disc_mask, dtype=bool)
    vessel_mask = np.asarray(vessel_mask, dtype=bool)
    crop_size = disc_mask.shape[0]

    band = exclude_vessels(measurement_band(disc_mask, band_width), vessel_mask)
    if not band.any():
        raise DegenerateRegion("Vessels cover the whole measurement band")
    partition = partition_zones(band, disc_center, axis_angle_deg)

    control = control_frame(crop_size, control_width)
    overlap = int((control & disc_mask).sum())
    if overlap:
        logger.warning("Disc reaches %d px into the control frame; those pixels are left out of the control", overlap)
        control &= ~disc_mask
    control = exclude_vessels(control, vessel_mask)
    if not control.any():
        raise DegenerateRegion("Control region is empty after vessel exclusion")

    try:
        whole_disc = whole_disc_region(disc_mask, vessel_mask)
    except DegenerateRegion:
        whole_disc = np.zeros_like(disc_mask)

    return ZonePartition(
        band=partition.band,
        zone_masks=partition.zone_masks,
        control=control,
        whole_disc=whole_disc,
        control_overlap=overlap,
    )


def check_partition(partition):
    """
    Verify the six zones tile the band without overlap and PMB lies inside T

    Raises:
        PallorError: When the partition is inconsistent
    """
    band = partition.band
    covered = np.zeros(band.shape, dtype=np.int16)
    for zone in SIX_ZONES:
        covered += partition.zone_masks[zone]
    if (covered > 1).any():
        raise PallorError("Zone masks overlap")
    if not np.array_equal(covered == 1, band):
        raise PallorError("Zone masks do not cover the band exactly")
    if (partition.zone_masks[Zone.PMB] & ~partition.zone_masks[Zone.T]).any():
        raise PallorError("PMB extends outside the temporal zone")
