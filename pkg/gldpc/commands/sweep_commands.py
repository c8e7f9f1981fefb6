import logging
from pathlib import Path

from gldpc.commands.common import (
    add_code_arguments, add_grid_argument, resolve_config, str_list
)
from gldpc.services.experiment_service import build_code, compare_schedulers
from gldpc.services.report_service import write_report
from gldpc.utils.exceptions import EXIT_OK

logger = logging.getLogger(__name__)


def sweep(args) -> int:
    cfg = resolve_config(args)
    comparison = compare_schedulers(cfg, build_code(cfg.code_spec()), cfg.output_dir)
    for curve in comparison.curves:
        fers = ", ".join(f"{point.fer:.3g}" for point in curve.points)
        print(f"{curve.schedule}: {fers}")
    return EXIT_OK


def report(args) -> int:
    cfg = resolve_config(args)
    directory = Path(getattr(args, "input", None) or cfg.output_dir)
    print(write_report(directory, cfg.axis), end="")
    return EXIT_OK


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("sweep", parents=parents,
                                   help="compare schedules over an SNR grid")
    add_code_arguments(parser)
    add_grid_argument(parser)
    parser.add_argument("--schedules", type=str_list,
                        help="flooding, random, rl-mixed, rl-per-snr (comma separated)")
    parser.add_argument("--i-max", dest="i_max", type=int)
    parser.add_argument("--min-frame-errors", dest="min_frame_errors", type=int)
    parser.add_argument("--max-frames", dest="max_frames", type=int)
    parser.add_argument("--chunk-size", dest="chunk_size", type=int)
    parser.add_argument("--policy-dir", dest="policy_dir")
    parser.set_defaults(handler=sweep)

    parser = subparsers.add_parser("report", parents=parents,
                                   help="render fer.csv and complexity.csv as text and gnuplot")
    parser.add_argument("--input", help="run directory (default: the output directory)")
    parser.add_argument("--axis", choices=("ebn0", "esn0"))
    parser.set_defaults(handler=report)
