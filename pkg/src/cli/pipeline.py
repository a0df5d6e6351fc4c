import concurrent.futures
import logging
import time
from datetime import datetime
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core.errors import (
    CoincidentPoints, DegenerateRegion, DegenerateShape, DivisionDegenerate, EmptyMask, MissingReferenceStats,
    PallorError, ProvisionError,
)
from ..core.schemas import Laterality, PallorRecord, PointPx, ProvisionFailure, QualityReason, Status
from ..imgio.codec import read_image
from ..imgio.manifest import read_manifest
from ..imgio.results import read_reference_stats, write_quality, write_records, write_run_summary
from ..measures.pallor import compute_record, pair_eyes, summarize_interocular
from ..measures.quality import apply_gates
from ..processing.geometry import build_geometry, crop_at, crop_origin_for
from ..processing.maskops import area, centroid, fill_holes, fit_ellipse, keep_largest, smooth_edges
from ..processing.preprocess import preprocess
from ..processing.regions import build_partition, check_partition
from ..providers.mask_file import mask_file_provider
from ..reports.overlays import make_overlays
from ..utils.helpers import format_timestamp, measure_execution_time

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ALL_FAILED = 1
EXIT_CONFIG_ERROR = 2

_FAILURE_REASONS = {
    ProvisionFailure.DISC_NOT_FOUND: QualityReason.DISC_NOT_FOUND,
    ProvisionFailure.FOVEA_NOT_FOUND: QualityReason.FOVEA_NOT_FOUND,
}


class Measurement:
    """Everything measured for one image, kept only as long as overlays need it"""

    def __init__(self, record, image, geometry, partition):
        self.record = record
        self.image = image
        self.geometry = geometry
        self.partition = partition


def measure(prep, output, config, entry, source_format=""):
    """
    Run the measurement chain on a preprocessed image and its segmentation bundle

    Args:
        prep (PreprocessedImage): Padded and resized image
        output (ProviderOutput): Disc mask, vessel mask and fovea in the same frame
        config (PipelineConfig): Pipeline settings
        entry (ManifestEntry): Source row
        source_format (str): Decoded file format

    Returns:
        Measurement: Gated record plus the geometry and regions it was measured on
    """
    disc = keep_largest(output.disc_mask)
    x0, y0 = crop_origin_for(centroid(disc), config.crop.size)
    origin = PointPx(x=float(x0), y=float(y0))
    image_crop = crop_at(prep.image, x0, y0, config.crop.size)
    disc_crop = crop_at(disc, x0, y0, config.crop.size)
    vessel_crop = crop_at(output.vessel_mask, x0, y0, config.crop.size)

    disc_crop = smooth_edges(
        fill_holes(disc_crop),
        open_radius=config.smooth.open_radius,
        blur_size=config.smooth.blur_size,
        threshold=config.smooth.threshold,
    )
    center_crop = centroid(disc_crop)
    ellipse = fit_ellipse(disc_crop)

    geometry = build_geometry(
        center_crop.shifted(x0, y0),
        output.fovea,
        origin,
        crop_size=config.crop.size,
        rule=config.laterality.rule,
        override=entry.expected_laterality,
    )
    partition = build_partition(
        disc_crop,
        vessel_crop,
        center_crop,
        geometry.axis_angle_deg,
        band_width=config.band.width,
        control_width=config.control.width,
    )
    check_partition(partition)

    record = compute_record(
        image_crop,
        partition,
        geometry,
        image_id=entry.image_id,
        subject_id=entry.subject_id,
        disc_area=area(disc_crop),
        eccentricity=ellipse.eccentricity,
        source_format=source_format,
        dataset=entry.dataset,
    )
    verdict = apply_gates(record.eccentricity, record.control_brightness, config.gates, partition.control_overlap)
    if verdict.status != Status.OK:
        record = record.model_copy(update={
            "status": verdict.status,
            "reasons": verdict.reasons,
            "reject_reason": verdict.reason_text,
        })
    return Measurement(record, prep.image, geometry, partition)


def failed_record(entry, reject_reason, reasons=None, source_format=""):
    return PallorRecord(
        image_id=entry.image_id,
        subject_id=entry.subject_id,
        laterality=entry.expected_laterality or Laterality.UNKNOWN,
        status=Status.FAILED,
        reject_reason=reject_reason,
        reasons=reasons or [],
        source_format=source_format,
        dataset=entry.dataset,
    )


@measure_execution_time
def _process(entry, provider, config, image=None, source_format="", overlay_dir=None, reference_stats=None):
    try:
        if image is None:
            image, source_format = read_image(entry.image_path)
        prep = preprocess(image, config.border_px, config.target_height)
        output = provider.provide(prep, entry)
        measurement = measure(prep, output, config, entry, source_format)
    except ProvisionError as e:
        reason = _FAILURE_REASONS.get(e.failure)
        logger.warning("Image %s failed: %s", entry.image_id, e)
        return failed_record(entry, e.failure.value, [reason] if reason else [], source_format)
    except (EmptyMask, DegenerateShape) as e:
        logger.warning("Image %s failed, no usable disc: %s", entry.image_id, e)
        return failed_record(entry, QualityReason.DISC_NOT_FOUND.value, [QualityReason.DISC_NOT_FOUND], source_format)
    except CoincidentPoints as e:
        logger.warning("Image %s failed, fovea on the disc centre: %s", entry.image_id, e)
        return failed_record(entry, QualityReason.FOVEA_NOT_FOUND.value, [QualityReason.FOVEA_NOT_FOUND],
                             source_format)
    except (DegenerateRegion, DivisionDegenerate) as e:
        logger.warning("Image %s failed, degenerate region: %s", entry.image_id, e)
        return failed_record(entry, QualityReason.DEGENERATE_REGION.value, [QualityReason.DEGENERATE_REGION],
                             source_format)
    except PallorError as e:
        logger.warning("Image %s failed: %s: %s", entry.image_id, type(e).__name__, e)
        return failed_record(entry, type(e).__name__, source_format=source_format)
    except OSError as e:
        logger.warning("Image %s could not be read: %s", entry.image_id, e)
        return failed_record(entry, f"IO_ERROR: {type(e).__name__}", source_format=source_format)
    except Exception as e:
        logger.exception("Unexpected error on image %s", entry.image_id)
        return failed_record(entry, f"INTERNAL_ERROR: {type(e).__name__}", source_format=source_format)

    if overlay_dir is not None and measurement.record.status == Status.OK:
        try:
            make_overlays(measurement.image, measurement.geometry, measurement.partition, measurement.record,
                          reference_stats, overlay_dir, config.clahe.tiles, config.clahe.clip_limit)
        except Exception:
            logger.exception("Overlays for %s could not be written", entry.image_id)
    return measurement.record


def process_image(entry, provider, config, image=None, source_format="", overlay_dir=None, reference_stats=None):
    """
    Measure one manifest entry; every per-image error becomes a FAILED record

    Args:
        entry (ManifestEntry): Row to process
        provider (SegmentationProvider): Source of masks and fovea
        config (PipelineConfig): Pipeline settings
        image (numpy.ndarray): Already decoded image; read from entry.image_path when None
        source_format (str): Format of an already decoded image
        overlay_dir (str): Where to write review panels, None to skip them
        reference_stats (dict): Zone -> (mean, sd) for the alert panels

    Returns:
        PallorRecord: Record with proc_time_ms filled in
    """
    record, elapsed_ms = _process(entry, provider, config, image, source_format, overlay_dir, reference_stats)
    return record.model_copy(update={"proc_time_ms": elapsed_ms})


def _group_summary(frame, column):
    summary = {}
    for key, group in frame.groupby(column, sort=True):
        summary[str(key) or "unlabelled"] = {
            "count": int(len(group)),
            "ok": int((group["status"] == Status.OK.value).sum()),
            "mean_ms": float(group["proc_time_ms"].mean()),
        }
    return summary


def build_run_summary(records, iopv_records, run_config, started_at, total_ms, outputs):
    frame = pd.DataFrame([
        {
            "image_id": r.image_id,
            "status": r.status.value,
            "proc_time_ms": r.proc_time_ms,
            "dataset": r.dataset,
            "source_format": r.source_format,
        }
        for r in records
    ])
    return {
        "started_at": format_timestamp(started_at),
        "manifest": str(run_config.manifest),
        "config": run_config.pipeline.flat(),
        "jobs": run_config.jobs,
        "n_images": len(records),
        "status_counts": {status.value: int((frame["status"] == status.value).sum()) for status in Status},
        "total_time_ms": total_ms,
        "median_time_ms": float(np.median(frame["proc_time_ms"])),
        "images": frame[["image_id", "status", "proc_time_ms"]].to_dict(orient="records"),
        "by_dataset": _group_summary(frame, "dataset"),
        "by_format": _group_summary(frame, "source_format"),
        "interocular": summarize_interocular(iopv_records),
        "outputs": outputs,
    }


def run_batch(run_config, provider=None):
    """
    Process a whole manifest and write pallor.csv, iopv.csv, quality.csv and run.json

    Manifest errors propagate to the caller; per-image errors never stop the batch.

    Args:
        run_config (RunConfig): Manifest, output directory and pipeline settings
        provider (SegmentationProvider): Defaults to the mask-file provider

    Returns:
        dict: {"records", "iopv", "paths", "exit_code"}
    """
    started_at = datetime.now()
    start = time.perf_counter()
    entries = read_manifest(run_config.manifest)
    provider = provider or mask_file_provider()
    out_dir = Path(run_config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reference_stats = None
    if run_config.reference_stats is not None:
        try:
            reference_stats = read_reference_stats(run_config.reference_stats)
        except MissingReferenceStats as e:
            logger.warning("%s; alert panels disabled", e)
    overlay_dir = out_dir / "overlays" if run_config.overlays else None

    records = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=run_config.jobs) as executor:
        futures = [
            executor.submit(process_image, entry, provider, run_config.pipeline,
                            overlay_dir=overlay_dir, reference_stats=reference_stats)
            for entry in entries
        ]
        for future in tqdm(concurrent.futures.as_completed(futures), total=len(futures), desc="Images",
                           unit="img", disable=None):
            records.append(future.result())

    records.sort(key=lambda r: r.image_id)
    iopv_records = pair_eyes(records)
    pallor_path, iopv_path = write_records(records, iopv_records, out_dir)
    quality_path = write_quality(records, out_dir / "quality.csv")
    total_ms = (time.perf_counter() - start) * 1000

    outputs = {"pallor": pallor_path, "iopv": iopv_path, "quality": quality_path, "run": out_dir / "run.json"}
    if overlay_dir is not None:
        outputs["overlays"] = overlay_dir
    summary = build_run_summary(records, iopv_records, run_config, started_at, total_ms, outputs)
    write_run_summary(summary, outputs["run"])

    counts = summary["status_counts"]
    logger.info("Processed %d images in %.0f ms: %d OK, %d rejected, %d failed", len(records), total_ms,
                counts["OK"], counts["REJECTED"], counts["FAILED"])
    exit_code = EXIT_OK if counts["OK"] > 0 else EXIT_ALL_FAILED
    return {"records": records, "iopv": iopv_records, "paths": outputs, "exit_code": exit_code}
