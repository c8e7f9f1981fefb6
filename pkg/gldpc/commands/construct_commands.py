import logging
from pathlib import Path

from gldpc.commands.common import add_code_arguments, resolve_config
from gldpc.services.experiment_service import build_code
from gldpc.services.report_service import render_rate_report
from gldpc.storage.files import atomic_write_text, dump_component, write_alist, write_plan
from gldpc.utils.exceptions import EXIT_OK

logger = logging.getLogger(__name__)


def construct(args) -> int:
    """Build the code and write code.alist, code.plan, code.component and rate.txt."""
    cfg = resolve_config(args)
    built = build_code(cfg.code_spec())
    out = Path(cfg.output_dir)
    write_alist(out / "code.alist", built.graph.base)
    write_plan(out / "code.plan", built.graph.plan, built.graph.component.name)
    atomic_write_text(out / "code.component", dump_component(built.graph.component))
    text = render_rate_report(built.report)
    atomic_write_text(out / "rate.txt", text)
    print(text, end="")
    return EXIT_OK


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("construct", parents=parents,
                                   help="build a GLDPC code and report its rate")
    add_code_arguments(parser)
    parser.set_defaults(handler=construct)
