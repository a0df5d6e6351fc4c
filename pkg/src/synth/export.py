import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..core.errors import NoiseNotSupported
from ..core.schemas import CSV_ZONE_ORDER, Zone
from ..imgio.codec import write_png
from ..imgio.results import write_table
from .scenes import Degradation, degrade, expected_pallor, random_scene, render

logger = logging.getLogger(__name__)

EXPECTED_ZONES = CSV_ZONE_ORDER + (Zone.GLOBAL, Zone.WHOLE_DISC)

# key=value settings that process the scenes at scale 1, for `process --config`
SETTINGS_FILE = "pallor.env"


def generate_scene_corpus(n_clean=20, n_dark=0, n_eccentric=0, seed=0, canvas=700):
    """
    Generate a labelled set of random scenes, some degraded to fail a quality gate

    Args:
        n_clean (int): Scenes that pass every gate
        n_dark (int): Scenes darkened below the luminance gate
        n_eccentric (int): Scenes stretched past the eccentricity gate
        seed (int): Seed of the random generator
        canvas (int): Canvas side in pixels

    Returns:
        list: (image_id, SynthScene, label) tuples
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(n_clean):
        corpus.append((f"clean_{i:03d}", random_scene(rng, canvas), "clean"))
    for i in range(n_dark):
        corpus.append((f"dark_{i:03d}", degrade(random_scene(rng, canvas), Degradation.DARK), "dark"))
    for i in range(n_eccentric):
        corpus.append((f"eccentric_{i:03d}", degrade(random_scene(rng, canvas), Degradation.ECCENTRIC), "eccentric"))
    return corpus


def expected_row(image_id, scene):
    row = {"image_id": image_id}
    try:
        expected = expected_pallor(scene)
    except NoiseNotSupported as e:
        logger.debug("No analytic pallor for %s: %s", image_id, e)
        expected = {}
    for zone in EXPECTED_ZONES:
        row[f"expected_{zone.value}"] = expected.get(zone)
    return row


def write_scene_files(corpus, out_dir, dataset="synthetic"):
    """
    Render scenes to disk with sidecar masks, a manifest and the analytic expectations

    The expectations hold when the canvas is not resized, so a settings file pinning
    target_height to the canvas height is written next to the manifest.

    Args:
        corpus (list): (image_id, SynthScene) or (image_id, SynthScene, label) tuples
        out_dir (str): Destination directory
        dataset (str): Dataset label written to the manifest

    Returns:
        tuple: (manifest.csv path, expected.csv path)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest_rows, expected_rows = [], []
    for item in corpus:
        image_id, scene = item[0], item[1]
        rendered = render(scene)
        write_png(out_dir / f"{image_id}.png", rendered.image)
        write_png(out_dir / f"{image_id}_disc.png", rendered.disc_mask)
        write_png(out_dir / f"{image_id}_vessels.png", rendered.vessel_mask)
        manifest_rows.append({
            "image_path": f"{image_id}.png",
            "image_id": image_id,
            "subject_id": "",
            "disc_mask_path": f"{image_id}_disc.png",
            "vessel_mask_path": f"{image_id}_vessels.png",
            "fovea_point": f"{rendered.fovea.x:.6f},{rendered.fovea.y:.6f}",
            "expected_laterality": "",
            "dataset": dataset,
        })
        expected_rows.append(expected_row(image_id, scene))

    manifest_path = write_table(pd.DataFrame(manifest_rows), out_dir / "manifest.csv")
    expected_path = write_table(pd.DataFrame(expected_rows), out_dir / "expected.csv")
    write_settings(corpus, out_dir / SETTINGS_FILE)
    logger.info("Wrote %d synthetic scenes to %s", len(corpus), out_dir)
    return manifest_path, expected_path


def write_settings(corpus, path):
    path = Path(path)
    heights = sorted({item[1].canvas_height for item in corpus})
    if len(heights) != 1:
        logger.warning("Scenes have canvas heights %s; no single target_height keeps them all at scale 1", heights)
        path.unlink(missing_ok=True)
        return None
    path.write_text(f"target_height={heights[0]}\n", encoding="utf-8")
    return path
