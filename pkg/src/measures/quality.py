import logging

import pandas as pd

from ..core.config import GateConfig
from ..core.schemas import QualityReason, QualityVerdict, Status

logger = logging.getLogger(__name__)


def apply_gates(eccentricity, control_brightness, config=None, control_overlap=0):
    """
    Automatic rejection of unreliable images

    The eccentricity and luminance gates are strict inequalities; any violated gate rejects the image.

    Args:
        eccentricity (float): Eccentricity of the post-processed disc
        control_brightness (float): Median grey level of the control region
        config (GateConfig): Thresholds
        control_overlap (int): Disc pixels inside the control frame; any at all rejects the image

    Returns:
        QualityVerdict: OK, or REJECTED with every violated gate listed
    """
    config = config or GateConfig()
    reasons = []
    if eccentricity > config.max_eccentricity:
        reasons.append(QualityReason.HIGH_ECCENTRICITY)
    if control_brightness < config.min_brightness:
        reasons.append(QualityReason.LOW_LUMINANCE)
    if control_overlap > 0:
        reasons.append(QualityReason.DISC_IN_CONTROL_FRAME)
    return QualityVerdict(status=Status.REJECTED if reasons else Status.OK, reasons=reasons)


def summarize_gates(table, config=None):
    """
    Summarize gate hits over a pallor results table

    Args:
        table (pandas.DataFrame): Rows of pallor.csv
        config (GateConfig): Thresholds

    Returns:
        tuple: (DataFrame with one row per criterion, dict of counts per status)
    """
    config = config or GateConfig()
    measured = table.dropna(subset=["eccentricity", "control_brightness"])
    criteria = [
        ("eccentricity", ">", config.max_eccentricity, measured["eccentricity"] > config.max_eccentricity),
        ("luminance", "<", config.min_brightness, measured["control_brightness"] < config.min_brightness),
    ]
    columns = {"eccentricity": "eccentricity", "luminance": "control_brightness"}

    rows = []
    for name, op, threshold, over in criteria:
        values = measured[columns[name]].astype(float)
        n = len(values)
        rows.append({
            "criterion": name,
            "threshold": f"{op} {threshold:g}",
            "n_images": n,
            "mean": float(values.mean()) if n else float("nan"),
            "sd": float(values.std(ddof=1)) if n > 1 else (0.0 if n else float("nan")),
            "n_over": int(over.sum()),
            "pct_over": 100.0 * float(over.sum()) / n if n else 0.0,
        })

    status_counts = {status.value: int((table["status"] == status.value).sum()) for status in Status}
    logger.info("Gate summary over %d measured images: %s", len(measured), status_counts)
    return pd.DataFrame(rows), status_counts
