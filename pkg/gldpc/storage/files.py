import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from pydantic import ValidationError

from gldpc.schemas.code_schema import BaseGraph, ComponentCode, GeneralizationPlan
from gldpc.services.code_service import dump_alist, load_alist
from gldpc.utils.exceptions import InvalidParameterError, StorageError, VersionMismatchError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

PLAN_HEADER = "gldpc-plan v1"


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write to a temporary file next to `path`, then rename it over the target."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}")
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}")


def read_text(path: PathLike) -> str:
    return read_bytes(path).decode("utf-8")


def write_alist(path: PathLike, base: BaseGraph) -> Path:
    return atomic_write_text(path, dump_alist(base))


def read_alist(path: PathLike) -> BaseGraph:
    return load_alist(read_text(path))


def dump_component(component: ComponentCode) -> str:
    """Component file: first line "p k", then p-k rows of p space-separated bits."""
    lines = [f"{component.p} {component.k}"]
    lines += [" ".join(str(bit) for bit in row) for row in component.hc_rows]
    return "\n".join(lines) + "\n"


def load_component(text: str, name: str = "file") -> ComponentCode:
    lines = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise InvalidParameterError("component file is empty")
    try:
        p, k = (int(tok) for tok in lines[0].split())
        rows = tuple(tuple(int(tok) for tok in line.split()) for line in lines[1:])
    except ValueError:
        raise InvalidParameterError("component file must start with 'p k' followed by bit rows")
    try:
        return ComponentCode(p=p, k=k, hc_rows=rows, name=name)
    except ValidationError as e:
        raise InvalidParameterError(f"invalid component code: {e}")


def read_component(path: PathLike) -> ComponentCode:
    return load_component(read_text(path), name=Path(path).stem)


def dump_plan(plan: GeneralizationPlan, component: str) -> str:
    """
    Plan sidecar: the header line, then "m <m>", "mu <g>/<m>", "zeta" followed by the
    sorted GCN indices and "component <name>".
    """
    zeta = " ".join(str(i) for i in plan.zeta)
    lines = [PLAN_HEADER, f"m {plan.m}", f"mu {plan.g}/{plan.m}", f"zeta {zeta}".rstrip(),
             f"component {component}"]
    return "\n".join(lines) + "\n"


def load_plan(text: str) -> Tuple[GeneralizationPlan, str]:
    """
    Parse a plan sidecar into the plan and the name of its component code.

    Raises:
        VersionMismatchError: If the header is not "gldpc-plan v1".
        InvalidParameterError: On a missing field, or a mu that disagrees with |zeta|/m.
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != PLAN_HEADER:
        raise VersionMismatchError(f"plan file does not start with '{PLAN_HEADER}'")
    fields = {}
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        fields[key] = rest.split()
    try:
        m = int(fields["m"][0])
        mu = Fraction(fields["mu"][0])
        component = fields["component"][0]
        plan = GeneralizationPlan(m=m, zeta=tuple(int(i) for i in fields.get("zeta", [])))
    except (KeyError, IndexError, ValueError, ZeroDivisionError, ValidationError) as e:
        raise InvalidParameterError(f"malformed plan file: {e}")
    if mu != plan.mu:
        raise InvalidParameterError(
            f"plan mu {mu} disagrees with |zeta|/m = {plan.g}/{plan.m}")
    return plan, component


def write_plan(path: PathLike, plan: GeneralizationPlan, component: str) -> Path:
    return atomic_write_text(path, dump_plan(plan, component))


def read_plan(path: PathLike) -> Tuple[GeneralizationPlan, str]:
    return load_plan(read_text(path))


def write_llr(path: PathLike, llr: np.ndarray) -> Path:
    """One frame of LLRs, whitespace separated, full float precision."""
    return atomic_write_text(path, " ".join(repr(float(v)) for v in llr) + "\n")


def read_llr(path: PathLike) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in read_text(path).split()], dtype=np.float64)
    except ValueError as e:
        raise InvalidParameterError(f"LLR file {path} holds a non-numeric value: {e}")
