import logging
from collections import defaultdict

import numpy as np
import pandas as pd

from ..core.errors import DegenerateRegion, DivisionDegenerate, MissingZone, PallorError
from ..core.schemas import (
    ANGULAR_ZONES, SIX_ZONES, ChannelStats, IoPVRecord, Laterality, PallorRecord, Status, Zone, zone_field,
)
from ..processing.preprocess import to_gray

logger = logging.getLogger(__name__)


def region_stats(image, region_mask):
    """
    Red and green channel statistics over the pixels of a region

    Args:
        image (numpy.ndarray): FundusImage
        region_mask (numpy.ndarray): BinaryMask of the same height and width, vessels already removed

    Returns:
        ChannelStats: Means and medians in double precision
    """
    pixels = np.asarray(image)[np.asarray(region_mask, dtype=bool)]
    if pixels.shape[0] == 0:
        raise DegenerateRegion("Region has no pixels")
    red = pixels[:, 0].astype(np.float64)
    green = pixels[:, 1].astype(np.float64)
    return ChannelStats(
        mean_R=float(red.mean()),
        mean_G=float(green.mean()),
        median_R=float(np.median(red)),
        median_G=float(np.median(green)),
        n=int(pixels.shape[0]),
    )


def zone_pallor(measure_stats, control_stats):
    """
    Green/red ratio of the measured region (means) over the same ratio in the control region (medians)
    """
    if measure_stats.mean_R == 0:
        raise DivisionDegenerate("Mean red of the measured region is zero")
    if control_stats.median_R == 0 or control_stats.median_G == 0:
        raise DivisionDegenerate("Control region has a zero median red or green")
    measured = measure_stats.mean_G / measure_stats.mean_R
    control = control_stats.median_G / control_stats.median_R
    return measured / control


def control_brightness(gray, control_mask):
    values = np.asarray(gray, dtype=np.float64)[np.asarray(control_mask, dtype=bool)]
    if values.size == 0:
        raise DegenerateRegion("Control region has no pixels")
    return float(np.median(values))


def _region_pallor(image, mask, control_stats):
    value = zone_pallor(region_stats(image, mask), control_stats)
    if not value > 0:
        raise DegenerateRegion(f"Pallor {value} is not positive; the region has no green signal")
    return value


def compute_record(image_crop, partition, geometry, timings=None, image_id="", subject_id="", disc_area=None,
                   eccentricity=None, source_format="", dataset=""):
    """
    Measure every zone of a working crop and assemble the result row

    A zone without usable pixels is left empty and listed in missing_zones; the record only
    fails when the pooled band or the control region is unusable.

    Args:
        image_crop (numpy.ndarray): Working crop of the preprocessed image
        partition (ZonePartition): Band, zones, control and whole-disc masks in crop coordinates
        geometry (DiscGeometry): Disc-fovea geometry
        timings (dict): Optional {"proc_time_ms": float}
        image_id (str): Row identifier
        subject_id (str): Participant identifier
        disc_area (int): Post-processed disc pixel count
        eccentricity (float): Eccentricity of the post-processed disc
        source_format (str): Decoded file format
        dataset (str): Dataset label

    Returns:
        PallorRecord: Record with status OK
    """
    if partition.control is None:
        raise DegenerateRegion("Partition has no control region")
    control_stats = region_stats(image_crop, partition.control)
    brightness = control_brightness(to_gray(image_crop), partition.control)

    try:
        pallor_global = _region_pallor(image_crop, partition.band, control_stats)
    except DivisionDegenerate as e:
        raise DegenerateRegion(f"Global pallor is not computable: {e}") from e

    values = {}
    missing = []
    for zone in ANGULAR_ZONES:
        try:
            values[zone_field(zone)] = _region_pallor(image_crop, partition.zone_masks[zone], control_stats)
        except (DegenerateRegion, DivisionDegenerate) as e:
            logger.warning("Zone %s of %s has no usable pixels: %s", zone.value, image_id, e)
            missing.append(zone)

    pallor_whole_disc = None
    try:
        if partition.whole_disc is not None:
            pallor_whole_disc = _region_pallor(image_crop, partition.whole_disc, control_stats)
    except (DegenerateRegion, DivisionDegenerate) as e:
        logger.warning("Whole-disc pallor of %s is not computable: %s", image_id, e)
        missing.append(Zone.WHOLE_DISC)

    nt_ratio = None
    if values.get("pallor_N") is not None and values.get("pallor_T"):
        nt_ratio = values["pallor_N"] / values["pallor_T"]

    return PallorRecord(
        image_id=image_id,
        subject_id=subject_id,
        laterality=geometry.laterality,
        status=Status.OK,
        pallor_global=pallor_global,
        pallor_whole_disc=pallor_whole_disc,
        nt_ratio=nt_ratio,
        missing_zones=missing,
        disc_area=disc_area,
        eccentricity=eccentricity,
        control_brightness=brightness,
        proc_time_ms=(timings or {}).get("proc_time_ms", 0.0),
        source_format=source_format,
        dataset=dataset,
        **values,
    )


def iopv(left, right):
    """
    Interocular pallor variability: sum of absolute differences over the six zones

    Args:
        left (PallorRecord): Left eye (OS)
        right (PallorRecord): Right eye (OD)

    Returns:
        IoPVRecord: Per-zone differences and their sum; PMB and the aggregates are left out
    """
    if left.subject_id != right.subject_id:
        raise PallorError(f"Cannot pair subjects '{left.subject_id}' and '{right.subject_id}'")
    differences = {}
    for zone in SIX_ZONES:
        a, b = left.pallor_of(zone), right.pallor_of(zone)
        if a is None or b is None:
            raise MissingZone(f"Zone {zone.value} is missing for subject '{left.subject_id}'")
        differences[zone] = abs(a - b)

    d_global = None
    if left.pallor_global is not None and right.pallor_global is not None:
        d_global = abs(left.pallor_global - right.pallor_global)
    return IoPVRecord(
        subject_id=left.subject_id,
        differences=differences,
        iopv=sum(differences[zone] for zone in SIX_ZONES),
        d_global=d_global,
    )


def pair_eyes(records):
    """
    Build IoPV rows for every subject with one OK left eye and one OK right eye

    Records without a subject id are ignored; when an eye appears more than once the first
    image id wins.
    """
    eyes = defaultdict(dict)
    for record in sorted(records, key=lambda r: r.image_id):
        if record.status != Status.OK or not record.subject_id:
            continue
        if record.laterality not in (Laterality.OD, Laterality.OS):
            continue
        by_eye = eyes[record.subject_id]
        if record.laterality in by_eye:
            logger.warning("Subject %s has more than one %s image; using %s", record.subject_id,
                           record.laterality.value, by_eye[record.laterality].image_id)
            continue
        by_eye[record.laterality] = record

    rows = []
    for subject_id in sorted(eyes):
        by_eye = eyes[subject_id]
        if Laterality.OS not in by_eye or Laterality.OD not in by_eye:
            continue
        try:
            rows.append(iopv(by_eye[Laterality.OS], by_eye[Laterality.OD]))
        except MissingZone as e:
            logger.warning("No IoPV for subject %s: %s", subject_id, e)
    return rows


def summarize_interocular(iopv_records):
    """
    Mean and sample SD of the interocular differences, per zone and in total

    Returns:
        dict: {"n_subjects", "zones": {zone: {"mean", "sd"}}, "iopv": {...}, "global": {...} or None}
    """
    if not iopv_records:
        return {"n_subjects": 0, "zones": {}, "iopv": None, "global": None}

    frame = pd.DataFrame([
        {**{zone.value: rec.differences[zone] for zone in SIX_ZONES}, "iopv": rec.iopv, "global": rec.d_global}
        for rec in iopv_records
    ])

    def describe(column):
        values = frame[column].dropna()
        if values.empty:
            return None
        sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        return {"mean": float(values.mean()), "sd": sd}

    return {
        "n_subjects": len(iopv_records),
        "zones": {zone.value: describe(zone.value) for zone in SIX_ZONES},
        "iopv": describe("iopv"),
        "global": describe("global"),
    }
