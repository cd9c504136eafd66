"""Observed-ratio statistics of a solver run.

theta_k = M_k / M_k^hm (harmonic mean of M_0..M_{k-1}) and
tau_k = L_k^avg / M_k (mean of L_0..L_{k-1}), for k = 1..K-1 over the
accepted iterations recorded in a ``CurvatureLedger``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import SolverResult
from .solver import CurvatureLedger

STAT_CUTOFF = 100


@dataclass
class DiagnosticsReport:
    theta_series: list[float]
    tau_series: list[float]
    theta_bar: Optional[float]
    tau_bar: Optional[float]
    bad_fraction: float
    eta_series: list[Optional[float]]
    condition_a_satisfied_from: Optional[int]
    mean_resolvents_per_iteration: float
    # True when the run was shorter than the k >= 100 cutoff and the bars cover all k.
    short_run: bool = False
    theta_lower_bound_ok: bool = True
    scaled_monotonicity_ok: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_series: bool = True) -> dict:
        d = asdict(self)
        if not include_series:
            for key in ("theta_series", "tau_series", "eta_series"):
                d.pop(key)
        return d


def harmonic_mean_series(M_values: Sequence[float]) -> np.ndarray:
    """``[M_1^hm, ..., M_K^hm]`` with ``M_k^hm = k / sum_{i<k} 1/M_i``."""
    M = np.asarray(M_values, dtype=np.float64)
    if np.any(M <= 0):
        raise ValueError("harmonic mean needs positive values")
    k = np.arange(1, M.size + 1)
    return k / np.cumsum(1.0 / M)


def theta_tau_series(ledger: CurvatureLedger) -> tuple[np.ndarray, np.ndarray]:
    """theta_k and tau_k for k = 1..len(ledger) - 1 (index 0 of the output is k = 1)."""
    M = np.asarray(ledger.M_values, dtype=np.float64)
    L = np.asarray(ledger.L_values, dtype=np.float64)
    if M.size == 0:
        raise ValueError("empty ledger")
    hm = harmonic_mean_series(M)[:-1]
    L_avg = (np.cumsum(L) / np.arange(1, L.size + 1))[:-1]
    return M[1:] / hm, L_avg / M[1:]


def condition_a_monitor(good_flags: Sequence[bool]) -> Optional[int]:
    """Smallest k0 with |B_k| <= k/3 for every observed k >= k0, or None if the last k violates it."""
    bad = np.concatenate([[0], np.cumsum(~np.asarray(good_flags, dtype=bool))])
    k = np.arange(bad.size)
    ok = 3 * bad <= k
    if not ok[-1]:
        return None
    violations = np.nonzero(~ok)[0]
    return 0 if violations.size == 0 else int(violations[-1] + 1)


def eta_series(C_values: Sequence[float], good_flags: Sequence[bool]) -> list[Optional[float]]:
    """Entry k-1 is eta_k for k = 1..K; the denominator uses the chronologically first half of B_k."""
    out: list[Optional[float]] = []
    bad_C: list[float] = []
    prefix = [0.0]
    for c, g in zip(C_values, good_flags):
        if not g:
            bad_C.append(float(c))
            prefix.append(prefix[-1] + float(c))
        n_bad = len(bad_C)
        half = n_bad // 2
        if n_bad < 2 or prefix[half] == 0.0:
            out.append(None)
        else:
            out.append(prefix[n_bad] / prefix[half])
    return out


def scaled_monotonicity(M_values: Sequence[float], rtol: float = 1e-12) -> bool:
    """i * M_i <= k * M_k for 1 <= i <= k."""
    M = np.asarray(M_values, dtype=np.float64)[1:]
    if M.size == 0:
        return True
    kM = np.arange(1, M.size + 1) * M
    running = np.maximum.accumulate(kM)
    return bool(np.all(kM >= running * (1 - rtol)))


def theta_lower_bound_holds(theta: np.ndarray, rtol: float = 1e-12) -> bool:
    k = np.arange(1, theta.size + 1)
    return bool(np.all(theta >= (k - 1) / (2 * k) * (1 - rtol)))


def _bar(series: np.ndarray, cutoff: int) -> tuple[Optional[float], bool]:
    if series.size == 0:
        return None, True
    # series[0] is k = 1
    if series.size >= cutoff:
        return float(np.max(series[cutoff - 1:])), False
    return float(np.max(series)), True


def diagnose(result: SolverResult, cutoff: int = STAT_CUTOFF) -> DiagnosticsReport:
    ledger: CurvatureLedger = result.ledger
    n_exec = result.extra.get("executed_iterations", len(result.trace))
    if len(ledger) == 0:
        theta = tau = np.zeros(0)
    else:
        theta, tau = theta_tau_series(ledger)
    theta_bar, short = _bar(theta, cutoff)
    tau_bar, _ = _bar(tau, cutoff)
    k = result.iterations
    return DiagnosticsReport(
        theta_series=theta.tolist(),
        tau_series=tau.tolist(),
        theta_bar=theta_bar,
        tau_bar=tau_bar,
        bad_fraction=result.bad_count / k if k else 0.0,
        eta_series=eta_series(ledger.C_values, ledger.good),
        condition_a_satisfied_from=condition_a_monitor(ledger.good),
        mean_resolvents_per_iteration=result.total_resolvents / n_exec if n_exec else math.nan,
        short_run=short,
        theta_lower_bound_ok=theta_lower_bound_holds(theta),
        scaled_monotonicity_ok=scaled_monotonicity(ledger.M_values),
    )
