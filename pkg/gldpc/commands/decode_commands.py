import logging

from gldpc.commands.common import add_code_arguments, add_grid_argument, int_list, resolve_config
from gldpc.schemas.decoder_schema import ScheduleSpec
from gldpc.services.decoder_service import decode
from gldpc.services.experiment_service import (
    RL_KINDS, build_code, load_policies, resolve_schedule
)
from gldpc.storage.files import read_llr
from gldpc.utils.exceptions import EXIT_OK, UsageError

logger = logging.getLogger(__name__)


def decode_frame(args) -> int:
    """Decode one LLR file and print convergence, iterations, messages and the trace."""
    cfg = resolve_config(args)
    built = build_code(cfg.code_spec())
    llr = read_llr(args.llr)
    spec = ScheduleSpec(kind=args.schedule, order=getattr(args, "order", None), seed=cfg.seed)
    policies = None
    if spec.kind in RL_KINDS:
        if spec.kind == "rl-per-snr" and getattr(args, "ebn0", None) is None:
            raise UsageError("rl-per-snr needs --ebn0 to pick a table")
        policies = load_policies(cfg, built.graph, spec.kind)
    schedule = resolve_schedule(spec, policies, getattr(args, "ebn0", 0.0), 0, 0)
    result = decode(llr, built.graph, schedule, cfg.i_max)

    print(f"schedule:   {spec.label}")
    print(f"converged:  {'yes' if result.converged else 'no'}")
    print(f"iterations: {result.iterations_used}")
    print(f"messages:   {result.spcn_to_vn_messages}")
    print(f"errors:     {int(result.bits.sum())}")
    if result.schedule_trace:
        print("trace:      " + " ".join(str(a) for a in result.schedule_trace))
    return EXIT_OK


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("decode", parents=parents,
                                   help="decode a single LLR frame and dump diagnostics")
    add_code_arguments(parser)
    add_grid_argument(parser)
    parser.add_argument("--llr", required=True, help="file with one frame of channel LLRs")
    parser.add_argument("--schedule", default="flooding",
                        choices=("flooding", "fixed", "random") + RL_KINDS)
    parser.add_argument("--order", type=int_list, help="CN order for --schedule fixed")
    parser.add_argument("--ebn0", type=float, help="frame Eb/N0 for per-SNR policies")
    parser.add_argument("--i-max", dest="i_max", type=int, help="maximum iterations")
    parser.add_argument("--policy-dir", dest="policy_dir", help="directory with Q-tables")
    parser.set_defaults(handler=decode_frame)
