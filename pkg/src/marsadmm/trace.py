"""Per-iteration metric records and their CSV persistence.

One row per iterate index, starting at 1 (the initialization row). Columns
that only exist on diagnostic iterations (objective, r_grad, r_subdiff) hold
NaN elsewhere. Floats are written with 17 significant digits so that
read(write(trace)) reproduces every value exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

__all__ = ["TRACE_FIELDS", "IterationRecord", "TraceSchemaError", "write_trace", "read_trace"]

TRACE_FIELDS = (
    "iter",
    "sfo_count",
    "diag_sfo",
    "wall_seconds",
    "objective",
    "r_feas",
    "r_grad",
    "r_subdiff",
    "rho",
    "eta",
    "beta",
    "lambda_norm",
)

_INT_FIELDS = frozenset(("iter", "sfo_count", "diag_sfo"))


class TraceSchemaError(ValueError):
    """Trace file does not match the record schema or its invariants."""


@dataclass
class IterationRecord:
    iter: int
    sfo_count: int
    diag_sfo: int
    wall_seconds: float
    objective: float
    r_feas: float
    r_grad: float
    r_subdiff: float
    rho: float
    eta: float
    beta: float
    lambda_norm: float


assert tuple(f.name for f in fields(IterationRecord)) == TRACE_FIELDS


def _fmt(name: str, value) -> str:
    if name in _INT_FIELDS:
        return str(int(value))
    return format(float(value), ".17g")


def write_trace(trace, sink) -> None:
    """Write records as CSV. ``sink`` is a path or an open text file."""
    if hasattr(sink, "write"):
        _write_rows(trace, sink)
        return
    with open(sink, "w", newline="") as fh:
        _write_rows(trace, fh)


def _write_rows(trace, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(TRACE_FIELDS)
    for rec in trace:
        writer.writerow(_fmt(name, getattr(rec, name)) for name in TRACE_FIELDS)


def read_trace(source) -> list[IterationRecord]:
    """Read a trace CSV back; validates header and monotonicity invariants."""
    if hasattr(source, "read"):
        return _read_rows(source, getattr(source, "name", "<stream>"))
    with open(source, "r", newline="") as fh:
        return _read_rows(fh, str(source))


def _read_rows(fh, where: str) -> list[IterationRecord]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceSchemaError(f"{where}: empty file, expected a header row") from None
    if tuple(header) != TRACE_FIELDS:
        raise TraceSchemaError(f"{where}: header {header!r} does not match trace schema")
    out: list[IterationRecord] = []
    for row in reader:
        if len(row) != len(TRACE_FIELDS):
            raise TraceSchemaError(f"{where}: row {len(out) + 2} has {len(row)} fields")
        vals = {
            name: (int(cell) if name in _INT_FIELDS else float(cell))
            for name, cell in zip(TRACE_FIELDS, row)
        }
        rec = IterationRecord(**vals)
        if out:
            prev = out[-1]
            if rec.iter <= prev.iter:
                raise TraceSchemaError(f"{where}: iter not strictly increasing at row {len(out) + 2}")
            if rec.sfo_count < prev.sfo_count or rec.diag_sfo < prev.diag_sfo:
                raise TraceSchemaError(f"{where}: oracle counters decrease at row {len(out) + 2}")
        out.append(rec)
    return out
