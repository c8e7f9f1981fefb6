import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

import gldpc
from gldpc.commands import construct_commands, decode_commands, sweep_commands, train_commands
from gldpc.commands.common import global_arguments
from gldpc.utils.exceptions import EXIT_FAILURE, EXIT_VALIDATION, GldpcError
from gldpc.utils.logger import setup_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = global_arguments()
    parser = argparse.ArgumentParser(
        prog="gldpc", parents=[common],
        description="GLDPC construction, scheduled BP decoding and Q-learning schedulers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {gldpc.__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for module in (construct_commands, train_commands, decode_commands, sweep_commands):
        module.register(subparsers, [common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse flags, run one subcommand and map errors to exit codes.

    Returns:
        int: 0 on success, otherwise the exit code carried by the error (2 usage, 3 IO,
            4 validation, 5 incompatibility, 1 anything else).
    """
    args = build_parser().parse_args(argv)
    setup_logging(getattr(args, "verbose", 0))
    try:
        return args.handler(args)
    except GldpcError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_FAILURE
