"""
Deterministic JSON and CSV output.

Floats are printed with a fixed number of significant digits and non-finite
values become null, so identical runs produce byte-identical files.
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel

from lambdaq.core.config import settings
from lambdaq.services.isolation import RootBox
from lambdaq.services.portfolio import DescentStep
from lambdaq.services.solver import SolveReport

TRACE_COLUMNS = ("iter", "x", "f", "step_kind", "bracket_left", "bracket_right", "rejected_newton")
BOX_COLUMNS = ("lo", "hi", "range_lo", "range_hi", "contains_root", "possible_root")


def round_float(value: float, digits: Optional[int] = None) -> Any:
    digits = digits or settings.FLOAT_SIGNIFICANT_DIGITS
    if not math.isfinite(value):
        return None
    return float(format(value, f".{digits}g"))


def round_floats(payload: Any, digits: Optional[int] = None) -> Any:
    if isinstance(payload, bool):
        return payload
    if isinstance(payload, float):
        return round_float(payload, digits)
    if isinstance(payload, dict):
        return {k: round_floats(v, digits) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [round_floats(v, digits) for v in payload]
    return payload


def to_payload(result: Union[BaseModel, dict]) -> dict:
    if isinstance(result, BaseModel):
        result = result.model_dump(by_alias=True)
    return round_floats(result)


def dump_json(result: Union[BaseModel, dict]) -> str:
    return json.dumps(to_payload(result), indent=2, allow_nan=False) + "\n"


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        rounded = round_float(value)
        return "" if rounded is None else repr(rounded)
    return str(value)


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
            count += 1
    return count


def write_trace_csv(path: Union[str, Path], report: SolveReport) -> int:
    rows = (
        (s.iteration, s.x, s.f, s.kind.value, s.bracket_left, s.bracket_right, s.rejected_newton)
        for s in report.trace
    )
    return write_csv(path, TRACE_COLUMNS, rows)


def write_boxes_csv(path: Union[str, Path], boxes: List[RootBox]) -> int:
    rows = ((b.lo, b.hi, b.range_lo, b.range_hi, b.contains_root, b.possible_root) for b in boxes)
    return write_csv(path, BOX_COLUMNS, rows)


def write_history_csv(path: Union[str, Path], history: List[DescentStep], dim: int) -> int:
    header = ["step"] + [f"w{i + 1}" for i in range(dim)] + ["rho", "objective", "grad_norm", "halvings"]
    rows = ([h.step, *h.weights, h.rho, h.objective, h.grad_norm, h.halvings] for h in history)
    return write_csv(path, header, rows)
