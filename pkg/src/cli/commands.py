import json
import logging
from pathlib import Path

import numpy as np

from ..core.config import RunConfig, load_pipeline_config
from ..evaluation.metrics import evaluate_manifests, summarize_metrics
from ..imgio.manifest import read_manifest
from ..imgio.results import read_pallor_table, write_table
from ..measures.quality import summarize_gates
from ..synth.export import SETTINGS_FILE, generate_scene_corpus, write_scene_files
from ..synth.scenes import SynthScene, random_scene
from .pipeline import EXIT_OK, run_batch

logger = logging.getLogger(__name__)


def _overrides(args):
    """Dotted configuration keys given explicitly on the command line"""
    overrides = {}
    for key, value in vars(args).items():
        if key.startswith("cfg_") and value is not None:
            overrides[key[4:].replace("__", ".")] = value
    return overrides


def process(args):
    pipeline = load_pipeline_config(args.config, _overrides(args))
    run_config = RunConfig(
        manifest=args.manifest,
        out_dir=args.out,
        pipeline=pipeline,
        overlays=args.overlays,
        reference_stats=args.ref_stats,
        jobs=args.jobs,
    )
    result = run_batch(run_config)
    print(f"Results written to {run_config.out_dir}")
    return result["exit_code"]


def evaluate(args):
    metrics = evaluate_manifests(read_manifest(args.pred), read_manifest(args.gt))
    out = Path(args.out)
    write_table(metrics, out)
    summary = summarize_metrics(metrics)
    summary_path = write_table(summary, out.with_name(f"{out.stem}_summary.csv"))
    print(summary.to_string(index=False))
    logger.info("Wrote %d metric rows to %s and the summary to %s", len(metrics), out, summary_path)
    return EXIT_OK


def load_scenes(source, seed=0):
    """
    Scenes from a count of random scenes, a JSON file, or inline JSON

    Returns:
        list: (image_id, SynthScene) tuples
    """
    text = str(source).strip()
    if text.isdigit():
        rng = np.random.default_rng(seed)
        return [(f"scene_{i:03d}", random_scene(rng)) for i in range(int(text))]

    path = Path(text)
    data = json.loads(path.read_text(encoding="utf-8") if path.is_file() else text)
    if isinstance(data, dict):
        data = [data]
    scenes = []
    for i, item in enumerate(data):
        image_id = item.pop("image_id", f"scene_{i:03d}") if isinstance(item, dict) else f"scene_{i:03d}"
        scenes.append((image_id, SynthScene.model_validate(item)))
    return scenes


def synth(args):
    if args.dark or args.eccentric:
        count = int(args.scenes) if str(args.scenes).isdigit() else 0
        corpus = generate_scene_corpus(count, args.dark, args.eccentric, seed=args.seed)
    else:
        corpus = load_scenes(args.scenes, args.seed)
    manifest_path, expected_path = write_scene_files(corpus, args.out)
    print(f"Wrote {len(corpus)} scenes; manifest {manifest_path}, expected values {expected_path}")
    settings = Path(args.out) / SETTINGS_FILE
    if settings.is_file():
        print(f"Process them with --config {settings} to keep the canvas at scale 1")
    return EXIT_OK


def qc(args):
    table = read_pallor_table(args.results)
    gates = load_pipeline_config(args.config, _overrides(args)).gates
    criteria, status_counts = summarize_gates(table, gates)
    print(criteria.to_string(index=False))
    print(", ".join(f"{status}: {count}" for status, count in status_counts.items()))
    if args.out:
        write_table(criteria, args.out)
    return EXIT_OK
