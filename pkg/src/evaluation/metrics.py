import logging
import math

import numpy as np
import pandas as pd
from sklearn.metrics import jaccard_score, recall_score

from ..core.errors import DimensionMismatch, EmptyGroundTruth, EmptyList, PallorError
from ..core.schemas import OneRBin, OneRScore, PointPx
from ..imgio.codec import read_mask
from ..processing.maskops import centroid, fit_ellipse

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["disc_iou", "disc_mean_accuracy", "disc_center_ed", "disc_center_pct", "vessel_iou",
                  "fovea_ed", "fovea_pct"]


def _flat_pair(pred, gt):
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"Prediction {pred.shape} and ground truth {gt.shape} differ in size")
    return gt.ravel().astype(np.uint8), pred.ravel().astype(np.uint8)


def iou(pred, gt):
    """
    Intersection over union of two masks; two empty masks agree perfectly
    """
    y_true, y_pred = _flat_pair(pred, gt)
    return float(jaccard_score(y_true, y_pred, pos_label=1, average="binary", zero_division=1.0))


def mean_accuracy(pred, gt):
    """
    Foreground recall TP / (TP + FN)
    """
    y_true, y_pred = _flat_pair(pred, gt)
    if not y_true.any():
        raise EmptyGroundTruth("Mean accuracy needs a non-empty ground truth mask")
    return float(recall_score(y_true, y_pred, pos_label=1, average="binary"))


def point_error(pred, gt, disc_major_axis=None):
    """
    Euclidean localization error, optionally as a percentage of the disc major axis

    Returns:
        dict: {"ed": pixels, "pct_of_disc": percent or None}
    """
    ed = math.hypot(pred.x - gt.x, pred.y - gt.y)
    pct = None
    if disc_major_axis is not None:
        if disc_major_axis <= 0:
            raise PallorError("Disc major axis must be positive")
        pct = 100.0 * ed / disc_major_axis
    return {"ed": ed, "pct_of_disc": pct}


def one_r_bin(pred_fovea, gt_fovea, disc_radius):
    """
    Bin a fovea prediction by its distance in fractions of the disc radius (bounds inclusive)
    """
    if disc_radius <= 0:
        raise PallorError("Disc radius must be positive")
    d = math.hypot(pred_fovea.x - gt_fovea.x, pred_fovea.y - gt_fovea.y)
    if d <= 0.25 * disc_radius:
        return OneRBin.Q25
    if d <= 0.5 * disc_radius:
        return OneRBin.Q50
    if d <= disc_radius:
        return OneRBin.R1
    return OneRBin.FAIL


def summarize_one_r(bins):
    """
    Nested fractions of predictions within 0.25R, 0.5R and 1R
    """
    bins = [OneRBin(b) for b in bins]
    if not bins:
        raise EmptyList("summarize_one_r needs at least one bin")
    n = len(bins)
    q25 = sum(b == OneRBin.Q25 for b in bins)
    q50 = q25 + sum(b == OneRBin.Q50 for b in bins)
    r1 = q50 + sum(b == OneRBin.R1 for b in bins)
    return OneRScore(within_025R=q25 / n, within_05R=q50 / n, within_1R=r1 / n, failure=(n - r1) / n)


def aggregate(values):
    """
    Mean, sample standard deviation and median; the SD of a single value is reported as 0
    """
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise EmptyList("aggregate needs at least one value")
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return {"mean": float(np.mean(values)), "sd": sd, "median": float(np.median(values))}


def fovea_of(entry):
    """Ground truth or predicted fovea of a manifest entry in its own frame, or None"""
    if entry.fovea_point is not None:
        return PointPx(x=entry.fovea_point[0], y=entry.fovea_point[1])
    if entry.fovea_mask_path is not None:
        mask = read_mask(entry.fovea_mask_path)
        if mask.any():
            return centroid(mask)
    return None


def evaluate_pair(pred, gt):
    """
    Compare one predicted manifest entry against its ground truth

    Returns:
        dict: Metric row keyed by METRIC_COLUMNS plus image_id and one_r_bin
    """
    row = {"image_id": gt.image_id, "one_r_bin": None}
    row.update({column: None for column in METRIC_COLUMNS})

    major_axis = None
    if gt.disc_mask_path is not None and pred.disc_mask_path is not None:
        gt_disc = read_mask(gt.disc_mask_path)
        pred_disc = read_mask(pred.disc_mask_path)
        row["disc_iou"] = iou(pred_disc, gt_disc)
        if gt_disc.any():
            row["disc_mean_accuracy"] = mean_accuracy(pred_disc, gt_disc)
            major_axis = fit_ellipse(gt_disc).major_axis_len
            if pred_disc.any():
                error = point_error(centroid(pred_disc), centroid(gt_disc), major_axis)
                row["disc_center_ed"], row["disc_center_pct"] = error["ed"], error["pct_of_disc"]

    if gt.vessel_mask_path is not None and pred.vessel_mask_path is not None:
        row["vessel_iou"] = iou(read_mask(pred.vessel_mask_path), read_mask(gt.vessel_mask_path))

    gt_fovea, pred_fovea = fovea_of(gt), fovea_of(pred)
    if gt_fovea is not None and pred_fovea is not None:
        error = point_error(pred_fovea, gt_fovea, major_axis)
        row["fovea_ed"], row["fovea_pct"] = error["ed"], error["pct_of_disc"]
        if major_axis is not None:
            row["one_r_bin"] = one_r_bin(pred_fovea, gt_fovea, major_axis / 2.0).value
    return row


def evaluate_manifests(pred_entries, gt_entries):
    """
    Per-image segmentation and localization metrics, joined on image_id

    Args:
        pred_entries (list): ManifestEntry rows pointing at predicted masks and foveae
        gt_entries (list): ManifestEntry rows pointing at ground truth

    Returns:
        pandas.DataFrame: One row per image present in both manifests, sorted by image_id
    """
    predictions = {entry.image_id: entry for entry in pred_entries}
    rows = []
    for gt in sorted(gt_entries, key=lambda e: e.image_id):
        pred = predictions.get(gt.image_id)
        if pred is None:
            logger.warning("No prediction for %s", gt.image_id)
            continue
        rows.append(evaluate_pair(pred, gt))
    if not rows:
        raise EmptyList("No image ids are shared by the prediction and ground truth manifests")

    frame = pd.DataFrame(rows, columns=["image_id"] + METRIC_COLUMNS + ["one_r_bin"])
    frame[METRIC_COLUMNS] = frame[METRIC_COLUMNS].astype("float64")
    return frame


def summarize_metrics(frame):
    """
    mean / sd / median per metric column plus the 1R fractions
    """
    rows = []
    for column in METRIC_COLUMNS:
        values = frame[column].dropna()
        if values.empty:
            continue
        rows.append({"metric": column, "n": len(values), **aggregate(values)})

    bins = frame["one_r_bin"].dropna().tolist()
    if bins:
        score = summarize_one_r(bins)
        for name, value in score.model_dump().items():
            rows.append({"metric": f"fovea_{name}", "n": len(bins), "mean": value, "sd": None, "median": None})
    return pd.DataFrame(rows, columns=["metric", "n", "mean", "sd", "median"])
