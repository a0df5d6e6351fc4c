import argparse
import logging
import os
import sys

# Add the repository root to sys.path so the module also runs as a script
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.cli import commands  # noqa: E402
from src.cli.pipeline import EXIT_CONFIG_ERROR  # noqa: E402
from src.core.config import LOG_LEVEL, LateralityRule  # noqa: E402

logger = logging.getLogger("src.cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level=None):
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT, force=True)


def _add_pipeline_flags(parser):
    group = parser.add_argument_group("pipeline settings (override the config file)")
    group.add_argument("--border-px", dest="cfg_border_px", type=int)
    group.add_argument("--target-height", dest="cfg_target_height", type=int)
    group.add_argument("--crop-size", dest="cfg_crop__size", type=int)
    group.add_argument("--band-width", dest="cfg_band__width", type=int)
    group.add_argument("--control-width", dest="cfg_control__width", type=int)
    group.add_argument("--open-radius", dest="cfg_smooth__open_radius", type=int)
    group.add_argument("--laterality-rule", dest="cfg_laterality__rule", choices=[r.value for r in LateralityRule])
    group.add_argument("--max-eccentricity", dest="cfg_gates__max_eccentricity", type=float)
    group.add_argument("--min-brightness", dest="cfg_gates__min_brightness", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="pallor", description="Optic disc pallor measurement")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--config", default=None, help="key=value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="Measure every image of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overlays", action="store_true", help="Write review panels per image")
    p.add_argument("--ref-stats", default=None, help="CSV of zone, mean, sd for the alert panels")
    p.add_argument("--jobs", type=int, default=1)
    _add_pipeline_flags(p)
    p.set_defaults(handler=commands.process)

    e = sub.add_parser("evaluate", help="Compare predicted masks and foveae with ground truth")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(handler=commands.evaluate)

    s = sub.add_parser("synth", help="Write synthetic scenes with masks and expected pallor")
    s.add_argument("--out", required=True)
    s.add_argument("--scenes", required=True, help="Number of random scenes, or a JSON list of scenes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dark", type=int, default=0, help="Extra scenes darkened below the luminance gate")
    s.add_argument("--eccentric", type=int, default=0, help="Extra scenes past the eccentricity gate")
    s.set_defaults(handler=commands.synth)

    q = sub.add_parser("qc", help="Summarize quality gate hits over a pallor.csv")
    q.add_argument("--results", required=True)
    q.add_argument("--out", default=None)
    _add_pipeline_flags(q)
    q.set_defaults(handler=commands.qc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
