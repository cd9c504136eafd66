"""Problem oracle abstraction, solver configuration, state and result records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

Point = NDArray[np.float64]

TerminationMode = Literal["absolute", "relative"]
IterateRule = Literal["non_monotone", "monotone"]


class OracleError(RuntimeError):
    """An oracle returned a non-finite value or raised during evaluation."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CurvatureTriple:
    """Lower curvature ``m``, upper curvature ``M`` and gradient Lipschitz ``L``."""

    m: float
    M: float
    L: float

    def __post_init__(self):
        if self.m < 0 or self.M < 0 or self.L < 0:
            raise ValueError(f"curvature constants must be non-negative: {self}")
        if self.M > self.L * (1 + 1e-12) or self.m > self.L * (1 + 1e-12):
            raise ValueError(f"L must dominate m and M: {self}")


def _default_value_and_gradient(oracle: "ProblemOracle", z: Point):
    return oracle.f_value(z), oracle.f_gradient(z)


@dataclass(frozen=True)
class ProblemOracle:
    """First-order oracle for ``phi = f + h``.

    ``h_prox(z, t)`` returns the exact minimizer of ``h(u) + ||u - z||^2 / (2t)``.
    ``omega_project`` projects onto the set Omega containing dom h on which
    ``grad f`` is Lipschitz. Matrix problems flatten column-major and record
    their shape in ``shape``.
    """

    f_value: Callable[[Point], float]
    f_gradient: Callable[[Point], Point]
    h_prox: Callable[[Point, float], Point]
    h_value: Callable[[Point], float]
    omega_project: Callable[[Point], Point]
    curvature: CurvatureTriple
    dimension: int
    name: str = "problem"
    shape: Optional[tuple[int, int]] = None
    value_and_gradient: Optional[Callable[[Point], tuple[float, Point]]] = None

    def f_value_and_gradient(self, z: Point) -> tuple[float, Point]:
        if self.value_and_gradient is not None:
            return self.value_and_gradient(z)
        return _default_value_and_gradient(self, z)


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    gamma: float = 1e-6
    M_cap: float = 1.0
    # None means max(0.01, gamma) * M_cap.
    M_init: Optional[float] = None
    rho_hat: float = 1e-7
    termination_mode: TerminationMode = "relative"
    iterate_rule: IterateRule = "non_monotone"
    restart: bool = False
    max_iterations: int = 10_000
    good_threshold: float = 0.9
    seed: int = 0
    trace_stride: int = 1

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not self.M_cap > 0:
            raise ValueError(f"M_cap must be positive, got {self.M_cap}")
        if self.M_init is not None and not self.M_init > 0:
            raise ValueError(f"M_init must be positive, got {self.M_init}")
        if not self.rho_hat > 0:
            raise ValueError(f"rho_hat must be positive, got {self.rho_hat}")
        if self.termination_mode not in ("absolute", "relative"):
            raise ValueError(f"unknown termination mode {self.termination_mode!r}")
        if self.iterate_rule not in ("non_monotone", "monotone"):
            raise ValueError(f"unknown iterate rule {self.iterate_rule!r}")
        if not 0 < self.good_threshold <= 1:
            raise ValueError(f"good_threshold must lie in (0, 1], got {self.good_threshold}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be at least 1")

    @property
    def M_start(self) -> float:
        if self.M_init is not None:
            return self.M_init
        return max(0.01, self.gamma) * self.M_cap

    @property
    def M_floor(self) -> float:
        return self.gamma * self.M_cap

    def with_overrides(self, **kwargs) -> "SolverConfig":
        return replace(self, **kwargs)


@dataclass
class SolverState:
    k: int
    A: float
    x: Point
    y: Point
    M_cur: float
    C_sum: float = 0.0
    good_count: int = 0
    bad_count: int = 0
    resolvent_count: int = 0
    restarted_this_k: bool = False
    phi_y: float = math.inf


@dataclass(frozen=True)
class IterationRecord:
    k: int
    a_k: float
    A_next: float
    M_k: float
    C_k: float
    L_k: float
    is_good: bool
    v_norm: float
    phi: float
    resolvents_this_iter: int
    restarted: bool
    elapsed: float
    # The iteration that met the tolerance stops after its first resolvent.
    terminal: bool = False


@dataclass
class SolverResult:
    y_hat: Point
    v_hat: Point
    reason: Literal["tolerance_met", "max_iterations"]
    final_phi: float
    total_resolvents: int
    trace: list[IterationRecord]
    method: str = "ac_fista"
    iterations: int = 0
    good_count: int = 0
    bad_count: int = 0
    final_residual: float = math.nan
    grad_z0_norm: float = math.nan
    # Center and curvature of the resolvent that produced (y_hat, v_hat).
    x_tilde_hat: Optional[Point] = None
    M_hat: float = math.nan
    ledger: Optional[object] = None
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)


def _check_finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise OracleError(f"non-finite {what}")
    return value


def evaluate_phi(problem: ProblemOracle, z: Point) -> float:
    """Return ``f(z) + h(z)``; ``inf`` outside dom h."""
    hz = problem.h_value(z)
    if hz == math.inf:
        return math.inf
    fz = float(problem.f_value(z))
    _check_finite(fz, "f value")
    return fz + float(hz)


def default_stationarity_tol(y: Point) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(y)))


def check_stationarity(
    problem: ProblemOracle,
    y: Point,
    v: Point,
    M: float,
    x_tilde: Point,
    tol: Optional[float] = None,
) -> bool:
    """Certify ``v in grad f(y) + dh(y)`` by re-solving the resolvent at ``x_tilde``.

    When ``y`` is the resolvent of ``x_tilde`` with curvature ``M`` and ``v`` is
    built as ``M (x_tilde - y) + grad f(y) - grad f(x_tilde)``, prox optimality
    gives the inclusion, so it suffices to check that ``y`` is that resolvent.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    if tol is None:
        tol = default_stationarity_tol(y)
    if not tol > 0:
        raise ValueError("tol must be positive")
    g_tilde = _check_finite(problem.f_gradient(x_tilde), "gradient")
    y_again = problem.h_prox(x_tilde - g_tilde / M, 1.0 / M)
    return bool(np.linalg.norm(np.asarray(y) - y_again) <= tol)


def termination_value(v: Point, grad_z0_norm: float, mode: TerminationMode) -> float:
    nv = float(np.linalg.norm(v))
    if mode == "absolute":
        return nv
    if mode == "relative":
        return nv / (grad_z0_norm + 1.0)
    raise ValueError(f"unknown termination mode {mode!r}")


def as_point(z: Sequence[float] | NDArray) -> Point:
    return np.asarray(z, dtype=np.float64).reshape(-1).copy()
