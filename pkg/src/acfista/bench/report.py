"""CSV and JSON writers for traces, summaries and diagnostics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

from ..core import IterationRecord, SolverResult
from ..diagnostics import DiagnosticsReport

TRACE_COLUMNS = ("k", "a_k", "M_k", "C_k", "L_k", "good", "v_norm", "phi",
                 "resolvents", "restarted", "terminal")


@dataclass(frozen=True)
class SummaryRow:
    method: str
    reason: str
    iterations: int
    resolvent_evaluations: int
    wall_seconds: float
    final_objective: float
    final_residual: float
    theta_bar: Optional[float]
    tau_bar: Optional[float]
    bad_fraction: float


def summary_row(label: str, result: SolverResult, diag: DiagnosticsReport) -> SummaryRow:
    return SummaryRow(
        method=label,
        reason=result.reason,
        iterations=result.extra.get("executed_iterations", len(result.trace)),
        resolvent_evaluations=result.total_resolvents,
        wall_seconds=result.wall_seconds,
        final_objective=result.final_phi,
        final_residual=result.final_residual,
        theta_bar=diag.theta_bar,
        tau_bar=diag.tau_bar,
        bad_fraction=diag.bad_fraction,
    )


def _g6(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.6g}"
    return str(x)


def emit_summary_table(rows: Sequence[SummaryRow], include_timings: bool = True) -> str:
    """CSV text with one row per method in the given order; floats to 6 significant digits."""
    if not rows:
        raise ValueError("no summary rows")
    cols = [f.name for f in fields(SummaryRow)]
    if not include_timings:
        cols.remove("wall_seconds")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_g6(getattr(r, c)) for c in cols])
    return buf.getvalue()


def _full(x: float) -> str:
    return repr(float(x))


def emit_trace_csv(records: Iterable[IterationRecord], include_timings: bool = False) -> str:
    cols = list(TRACE_COLUMNS) + (["elapsed"] if include_timings else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        row = [r.k, _full(r.a_k), _full(r.M_k), _full(r.C_k), _full(r.L_k), int(r.is_good),
               _full(r.v_norm), _full(r.phi), r.resolvents_this_iter, int(r.restarted), int(r.terminal)]
        if include_timings:
            row.append(_full(r.elapsed))
        w.writerow(row)
    return buf.getvalue()


def read_trace_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n"
