import logging
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure
from PIL import Image, ImageDraw

from ..core.schemas import CSV_ZONE_ORDER, Zone
from ..imgio.codec import write_png
from ..processing.geometry import crop_at, rotate_for_display
from ..processing.preprocess import clahe, to_gray

logger = logging.getLogger(__name__)

ZONE_COLORS = {
    Zone.T: (66, 133, 244),
    Zone.TS: (52, 168, 83),
    Zone.NS: (251, 188, 5),
    Zone.N: (171, 71, 188),
    Zone.NI: (0, 172, 193),
    Zone.TI: (255, 112, 67),
    Zone.PMB: (255, 255, 255),
}
ALERT_COLOR = (255, 0, 0)
AXIS_COLOR = (255, 255, 0)
TINT_ALPHA = 0.55

PANEL_NAMES = {
    "A": "A_axis.png",
    "B": "B_crop.png",
    "C": "C_disc.png",
    "D": "D_band.png",
    "E": "E_band_control.png",
    "F": "F_zones.png",
    "G": "G_bars.png",
}


def exceeded_zones(record, reference_stats):
    """
    Zones whose pallor is above the reference mean plus one standard deviation
    """
    exceeded = set()
    for zone in CSV_ZONE_ORDER:
        value = record.pallor_of(zone)
        if value is None or zone not in reference_stats:
            continue
        mean, sd = reference_stats[zone]
        if value > mean + sd:
            exceeded.add(zone)
    return exceeded


def _masked(crop, mask):
    out = np.zeros_like(crop)
    out[mask] = crop[mask]
    return out


def _tint(image, mask, color, alpha=TINT_ALPHA):
    blended = image.astype(np.float64)
    blended[mask] = (1 - alpha) * blended[mask] + alpha * np.asarray(color, dtype=np.float64)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def axis_panel(image, geometry, clahe_tiles=8, clahe_clip=0.01):
    """
    CLAHE-enhanced full frame, rotated so the disc-fovea axis is horizontal, with the axis drawn
    """
    enhanced = clahe(to_gray(image), clahe_tiles, clahe_clip)
    rgb = np.repeat(np.rint(enhanced).astype(np.uint8)[:, :, None], 3, axis=2)
    canvas = Image.fromarray(rgb)
    ImageDraw.Draw(canvas).line(
        [geometry.disc_center.as_tuple(), geometry.fovea.as_tuple()], fill=AXIS_COLOR, width=5,
    )
    return rotate_for_display(np.asarray(canvas), geometry.axis_angle_deg, geometry.disc_center)


def zone_panel(crop, partition, alerts=frozenset()):
    """
    Six-zone wheel over the crop; PMB outlined on top of T; alerted zones in red
    """
    out = crop.copy()
    for zone in (Zone.T, Zone.TS, Zone.NS, Zone.N, Zone.NI, Zone.TI):
        out = _tint(out, partition.zone_masks[zone], ALERT_COLOR if zone in alerts else ZONE_COLORS[zone])
    pmb = partition.zone_masks[Zone.PMB]
    out = _tint(out, pmb, ALERT_COLOR if Zone.PMB in alerts else ZONE_COLORS[Zone.PMB], alpha=0.3)
    return out


def bar_chart(record, reference_stats, path):
    """
    Per-zone pallor bars with a dashed line at reference mean + 1 SD
    """
    zones = [zone for zone in CSV_ZONE_ORDER if record.pallor_of(zone) is not None]
    values = [record.pallor_of(zone) for zone in zones]
    alerts = exceeded_zones(record, reference_stats)
    colors = ["#ff0000" if zone in alerts else "#4a7fb5" for zone in zones]

    # No pyplot here; charts are rendered from worker threads
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    positions = np.arange(len(zones))
    ax.bar(positions, values, color=colors)
    for i, zone in enumerate(zones):
        if zone in reference_stats:
            mean, sd = reference_stats[zone]
            ax.hlines(mean + sd, i - 0.4, i + 0.4, colors="black", linestyles="dashed")
    ax.set_xticks(positions)
    ax.set_xticklabels([zone.value for zone in zones])
    ax.set_ylabel("Pallor")
    ax.set_title(record.image_id)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    return Path(path)


def make_overlays(image, geometry, partition, record, reference_stats=None, out_dir="overlays",
                  clahe_tiles=8, clahe_clip=0.01):
    """
    Write the review panels for one processed image

    Args:
        image (numpy.ndarray): Preprocessed FundusImage
        geometry (DiscGeometry): Geometry used for the measurement
        partition (ZonePartition): Regions in crop coordinates
        record (PallorRecord): Measured record
        reference_stats (dict): Zone -> (mean, sd); panels F and G need it
        out_dir (str): Destination directory, one sub-directory per image

    Returns:
        dict: Panel letter -> written path
    """
    target = Path(out_dir) / record.image_id
    target.mkdir(parents=True, exist_ok=True)
    crop = crop_at(image, geometry.crop_origin.x, geometry.crop_origin.y, geometry.crop_size)

    panels = {
        "A": axis_panel(image, geometry, clahe_tiles, clahe_clip),
        "B": crop,
        "C": _masked(crop, partition.whole_disc if partition.whole_disc is not None else partition.band),
        "D": _masked(crop, partition.band),
        "E": _masked(crop, partition.band | partition.control) if partition.control is not None
        else _masked(crop, partition.band),
    }
    written = {letter: write_png(target / PANEL_NAMES[letter], raster) for letter, raster in panels.items()}

    if not reference_stats:
        logger.warning("No reference statistics; writing panels A-E only for %s", record.image_id)
        return written

    alerts = exceeded_zones(record, reference_stats)
    written["F"] = write_png(target / PANEL_NAMES["F"], zone_panel(crop, partition, alerts))
    written["G"] = bar_chart(record, reference_stats, target / PANEL_NAMES["G"])
    if alerts:
        logger.info("%s exceeds the reference in %s", record.image_id, ", ".join(sorted(z.value for z in alerts)))
    return written
