import logging
from pathlib import Path

import pandas as pd

from ..core.errors import EmptyList, MissingColumn, MissingReferenceStats
from ..core.schemas import CSV_ZONE_ORDER, IOPV_ZONE_ORDER, Zone, zone_field
from ..utils.helpers import serialize_to_json

logger = logging.getLogger(__name__)

PALLOR_COLUMNS = (
    ["image_id", "eye", "status", "reject_reason", "disc_area_px", "eccentricity", "control_brightness"]
    + [f"pallor_{zone.value}" for zone in CSV_ZONE_ORDER]
    + ["pallor_global", "pallor_whole_disc", "nt_ratio", "proc_time_ms"]
)
IOPV_COLUMNS = ["subject_id"] + [f"d_{zone.value}" for zone in IOPV_ZONE_ORDER] + ["iopv"]
QUALITY_COLUMNS = [
    "image_id", "subject_id", "eye", "dataset", "source_format", "status", "reasons",
    "missing_zones", "eccentricity", "control_brightness",
]

FLOAT_FORMAT = "%.6f"


def _write_csv(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")


def pallor_frame(records):
    rows = []
    for r in records:
        row = {
            "image_id": r.image_id,
            "eye": r.laterality.value,
            "status": r.status.value,
            "reject_reason": r.reject_reason,
            "disc_area_px": r.disc_area,
            "eccentricity": r.eccentricity,
            "control_brightness": r.control_brightness,
        }
        for zone in CSV_ZONE_ORDER + (Zone.GLOBAL, Zone.WHOLE_DISC):
            row[zone_field(zone)] = r.pallor_of(zone)
        row["nt_ratio"] = r.nt_ratio
        row["proc_time_ms"] = r.proc_time_ms
        rows.append(row)

    frame = pd.DataFrame(rows, columns=PALLOR_COLUMNS)
    frame["disc_area_px"] = frame["disc_area_px"].astype("Int64")
    float_columns = [c for c in PALLOR_COLUMNS if c not in ("image_id", "eye", "status", "reject_reason", "disc_area_px")]
    frame[float_columns] = frame[float_columns].astype("float64")
    return frame


def iopv_frame(iopv_records):
    rows = []
    for rec in iopv_records:
        row = {"subject_id": rec.subject_id}
        for zone in IOPV_ZONE_ORDER:
            row[f"d_{zone.value}"] = rec.differences[zone]
        row["iopv"] = rec.iopv
        rows.append(row)
    frame = pd.DataFrame(rows, columns=IOPV_COLUMNS)
    frame[IOPV_COLUMNS[1:]] = frame[IOPV_COLUMNS[1:]].astype("float64")
    return frame


def write_records(records, iopv_records, out_dir):
    """
    Write pallor.csv and iopv.csv

    Args:
        records (list): PallorRecord rows, written in the given order
        iopv_records (list): IoPVRecord rows
        out_dir (str): Destination directory

    Returns:
        tuple: (pallor.csv path, iopv.csv path)
    """
    if not records:
        raise EmptyList("write_records needs at least one record")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pallor_path = out_dir / "pallor.csv"
    iopv_path = out_dir / "iopv.csv"
    _write_csv(pallor_frame(records), pallor_path)
    _write_csv(iopv_frame(iopv_records), iopv_path)
    logger.info("Wrote %d pallor rows and %d iopv rows to %s", len(records), len(iopv_records), out_dir)
    return pallor_path, iopv_path


def write_quality(records, path):
    """
    Write the quality ledger: status, reasons and covariates per image
    """
    rows = [
        {
            "image_id": r.image_id,
            "subject_id": r.subject_id,
            "eye": r.laterality.value,
            "dataset": r.dataset,
            "source_format": r.source_format,
            "status": r.status.value,
            "reasons": ";".join(reason.value for reason in r.reasons),
            "missing_zones": ";".join(zone.value for zone in r.missing_zones),
            "eccentricity": r.eccentricity,
            "control_brightness": r.control_brightness,
        }
        for r in records
    ]
    frame = pd.DataFrame(rows, columns=QUALITY_COLUMNS)
    frame[["eccentricity", "control_brightness"]] = frame[["eccentricity", "control_brightness"]].astype("float64")
    _write_csv(frame, path)
    return Path(path)


def write_run_summary(summary, path):
    path = Path(path)
    path.write_text(serialize_to_json(summary) + "\n", encoding="utf-8")
    return path


def write_table(frame, path):
    """Write any summary DataFrame with the shared CSV conventions"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(frame, path)
    return path


def read_pallor_table(path):
    frame = pd.read_csv(path, dtype={"image_id": str, "eye": str, "status": str, "reject_reason": str},
                        keep_default_na=True)
    for column in ("image_id", "status", "eccentricity", "control_brightness"):
        if column not in frame.columns:
            raise MissingColumn(column)
    return frame


def read_reference_stats(path):
    """
    Read normative per-zone statistics for the alert overlay

    Args:
        path (str): CSV with columns zone, mean, sd

    Returns:
        dict: Zone -> (mean, sd)
    """
    if path is None or not Path(path).is_file():
        raise MissingReferenceStats(f"Reference statistics file not found: {path}")
    frame = pd.read_csv(path, dtype={"zone": str})
    for column in ("zone", "mean", "sd"):
        if column not in frame.columns:
            raise MissingColumn(column)
    stats = {}
    for row in frame.itertuples(index=False):
        stats[Zone(str(row.zone).strip().upper())] = (float(row.mean), float(row.sd))
    return stats
