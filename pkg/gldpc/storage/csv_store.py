import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List

from pydantic import ValidationError

from gldpc.schemas.experiment_schema import (
    ComplexityTable, FerCurve, FerPoint, PairedPoint, RunRecord
)
from gldpc.storage.files import PathLike, atomic_write_text, read_text
from gldpc.utils.exceptions import StorageError

logger = logging.getLogger(__name__)

FER_COLUMNS = ("code_id", "schedule", "ebn0_db", "esn0_db", "frames", "frame_errors", "fer",
               "ci_lo", "ci_hi", "mean_iters", "mean_msgs")
COMPLEXITY_COLUMNS = ("schedule", "esn0_db", "mean_msgs")
PAIRS_COLUMNS = tuple(PairedPoint.__fields__)


def _format(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _render(columns: Iterable[str], rows: Iterable[Dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row[column]) for column in columns])
    return buffer.getvalue()


def _parse(path: PathLike, columns: Iterable[str]) -> List[Dict[str, str]]:
    reader = csv.DictReader(io.StringIO(read_text(path)))
    if reader.fieldnames is None or tuple(reader.fieldnames) != tuple(columns):
        raise StorageError(f"{path} does not have the columns {', '.join(columns)}")
    return list(reader)


def write_fer_csv(path: PathLike, curves: Iterable[FerCurve]) -> Path:
    rows = []
    for curve in curves:
        for point in curve.points:
            rows.append({"code_id": curve.code_id, "schedule": curve.schedule, **point.dict()})
    return atomic_write_text(path, _render(FER_COLUMNS, rows))


def read_fer_csv(path: PathLike) -> List[FerCurve]:
    """Curves in first-appearance order of their (code_id, schedule) pair."""
    curves: Dict[tuple, FerCurve] = {}
    try:
        for row in _parse(path, FER_COLUMNS):
            key = (row["code_id"], row["schedule"])
            curve = curves.setdefault(key, FerCurve(code_id=key[0], schedule=key[1]))
            curve.points.append(FerPoint(**{k: v for k, v in row.items()
                                            if k not in ("code_id", "schedule")}))
    except ValidationError as e:
        raise StorageError(f"malformed row in {path}: {e}")
    return list(curves.values())


def write_complexity_csv(path: PathLike, table: ComplexityTable) -> Path:
    rows = [{"schedule": schedule, "esn0_db": esn0, "mean_msgs": msgs}
            for schedule in table.schedules
            for esn0, msgs in zip(table.esn0_grid, table.rows[schedule])]
    return atomic_write_text(path, _render(COMPLEXITY_COLUMNS, rows))


def read_complexity_csv(path: PathLike) -> ComplexityTable:
    schedules: List[str] = []
    grid: List[float] = []
    rows: Dict[str, List[float]] = {}
    try:
        for row in _parse(path, COMPLEXITY_COLUMNS):
            schedule, esn0 = row["schedule"], float(row["esn0_db"])
            if schedule not in rows:
                schedules.append(schedule)
                rows[schedule] = []
            if len(schedules) == 1:
                grid.append(esn0)
            rows[schedule].append(float(row["mean_msgs"]))
    except ValueError as e:
        raise StorageError(f"malformed row in {path}: {e}")
    return ComplexityTable(schedules=schedules, esn0_grid=grid, rows=rows)


def write_pairs_csv(path: PathLike, pairs: Iterable[PairedPoint]) -> Path:
    return atomic_write_text(path, _render(PAIRS_COLUMNS, (p.dict() for p in pairs)))


def read_pairs_csv(path: PathLike) -> List[PairedPoint]:
    try:
        return [PairedPoint(**row) for row in _parse(path, PAIRS_COLUMNS)]
    except ValidationError as e:
        raise StorageError(f"malformed row in {path}: {e}")


def write_runs_json(path: PathLike, records: Iterable[RunRecord]) -> Path:
    payload = [json.loads(record.json()) for record in records]
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_runs_json(path: PathLike) -> List[RunRecord]:
    try:
        return [RunRecord(**item) for item in json.loads(read_text(path))]
    except (ValueError, ValidationError) as e:
        raise StorageError(f"malformed run records in {path}: {e}")
