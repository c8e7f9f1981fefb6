import logging
from pathlib import Path
from typing import List

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from gldpc.schemas.code_schema import RateReport
from gldpc.schemas.experiment_schema import FerCurve
from gldpc.storage.csv_store import read_complexity_csv, read_fer_csv, read_pairs_csv
from gldpc.storage.files import atomic_write_text
from gldpc.utils.exceptions import StorageError

logger = logging.getLogger(__name__)

templates = Environment(
    loader=FileSystemLoader(str(Path(__file__).resolve().parent.parent / "templates")),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


def render_rate_report(report: RateReport) -> str:
    return templates.get_template("rate.txt.j2").render(report=report)


def partial_schedules(curves: List[FerCurve]) -> List[str]:
    """Schedules whose grid differs from the longest curve's grid."""
    if not curves:
        return []
    reference = max(curves, key=lambda c: len(c.points)).esn0_grid
    return [curve.schedule for curve in curves if curve.esn0_grid != reference]


def write_report(directory, axis: str = "esn0") -> str:
    """
    Render `report.txt` and `plot.gp` from the CSV files of a run directory.

    Curves with a grid that differs from the others are listed as partial and kept in
    separate table sections instead of being merged.

    Args:
        directory: Run directory holding fer.csv (complexity.csv, pairs.csv optional).
        axis (str, optional): "esn0" or "ebn0" for the SNR column. Defaults to "esn0".

    Returns:
        str: The report text.

    Raises:
        StorageError: If the directory holds no fer.csv ("no runs found").
    """
    directory = Path(directory)
    fer_path = directory / "fer.csv"
    if not fer_path.exists():
        raise StorageError(f"no runs found in {directory}")
    curves = read_fer_csv(fer_path)
    if not curves:
        raise StorageError(f"no runs found in {directory}")
    partial = partial_schedules(curves)
    if partial:
        logger.warning("partial results for %s; not merged", ", ".join(partial))

    complexity_path = directory / "complexity.csv"
    complexity = read_complexity_csv(complexity_path) if complexity_path.exists() else None
    pairs_path = directory / "pairs.csv"
    pairs = read_pairs_csv(pairs_path) if pairs_path.exists() else []

    context = dict(curves=curves, complexity=complexity, pairs=pairs, partial=partial,
                   axis=axis, axis_label="Es/N0" if axis == "esn0" else "Eb/N0",
                   snr_key=f"{axis}_db")
    text = templates.get_template("report.txt.j2").render(**context)
    atomic_write_text(directory / "report.txt", text)
    atomic_write_text(directory / "plot.gp",
                      templates.get_template("plot.gp.j2").render(**context))
    return text
