import logging

from gldpc.commands.common import add_code_arguments, add_grid_argument, resolve_config
from gldpc.services.experiment_service import build_code, run_training
from gldpc.utils.exceptions import EXIT_OK, UsageError

logger = logging.getLogger(__name__)


def train(args) -> int:
    cfg = resolve_config(args)
    if cfg.train_size == 0:
        raise UsageError("--size must be positive")
    paths = run_training(cfg, build_code(cfg.code_spec()))
    for path in paths:
        print(path)
    return EXIT_OK


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("train", parents=parents,
                                   help="learn CN scheduling Q-tables")
    add_code_arguments(parser)
    add_grid_argument(parser)
    parser.add_argument("--mode", dest="train_mode", choices=("mixed", "per-snr"))
    parser.add_argument("--size", dest="train_size", type=int,
                        help="episodes (mixed: total, per-snr: per table)")
    parser.add_argument("--alpha", type=float, help="learning rate")
    parser.add_argument("--beta", type=float, help="reward discount rate")
    parser.add_argument("--epsilon", type=float, help="probability of exploration")
    parser.add_argument("--ell-max", dest="ell_max", type=int, help="steps per episode")
    parser.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    parser.add_argument("--log-every", dest="log_every", type=int)
    parser.set_defaults(handler=train)
