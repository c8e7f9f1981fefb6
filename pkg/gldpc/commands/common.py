import argparse
from typing import Any, Dict

from gldpc.schemas.experiment_schema import ExperimentConfig
from gldpc.utils.config_utils import load_config


def float_list(text: str):
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def int_list(text: str):
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def str_list(text: str):
    return [item.strip() for item in text.split(",") if item.strip()]


def global_arguments() -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand."""
    parser = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="root seed for every random stream")
    parser.add_argument("--out-dir", dest="output_dir",
                        help="output directory (default: $GLDPC_OUTPUT_DIR or ./runs)")
    parser.add_argument("-v", "--verbose", action="count",
                        help="-v for progress, -vv for debug output")
    parser.add_argument("--workers", type=int, help="worker processes for frame simulation")
    return parser


def add_code_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("code")
    group.add_argument("--gamma", type=int, help="VN degree of the base graph")
    group.add_argument("--p", type=int, help="CN degree of the base graph")
    group.add_argument("--n", type=int, help="code length")
    group.add_argument("--alist", help="base graph alist file instead of generating one")
    group.add_argument("--base-seed", dest="base_seed", type=int)
    group.add_argument("--component",
                       help="hamming74, hamming-<r>, spc-<p> or a component code file")
    group.add_argument("--mu", type=float, help="fraction of CNs replaced by GCNs")
    group.add_argument("--zeta", type=int_list, help="explicit GCN indices, comma separated")
    group.add_argument("--plan-seed", dest="plan_seed", type=int)


def add_grid_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--snr-grid", dest="snr_grid", type=float_list,
                        help="Eb/N0 points in dB, comma separated")


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Flags override the config file, which overrides compiled defaults."""
    flags = vars(args)
    overrides: Dict[str, Any] = {key: flags[key] for key in ExperimentConfig.__fields__
                                 if key in flags}
    return load_config(flags.get("config"), overrides)
