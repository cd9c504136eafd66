"""Average-curvature accelerated composite gradient solvers.

``run_ac_fista`` is the main method; ``run_ac_acg`` and ``run_fista_constant``
are the comparison baselines sharing the same iteration skeleton.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .core import (
    IterationRecord,
    OracleError,
    Point,
    ProblemOracle,
    SolverConfig,
    SolverResult,
    SolverState,
    as_point,
    evaluate_phi,
    termination_value,
)

logger = logging.getLogger(__name__)

Variant = Literal["ac_fista", "ac_acg", "fista_constant"]

DEGENERATE_STEP_RTOL = 1e-14
INFEASIBLE_START_STEP = 1e-8
EPS = float(np.finfo(np.float64).eps)
# Switch to the gradient form once rounding could exceed 1% of the curvature gap.
CANCELLATION_FACTOR = 8.0
CANCELLATION_RTOL = 1e-2


@dataclass
class CurvatureLedger:
    """Per accepted iteration: C_k, max(C_k, L_k), L_k, M_k and the good flag."""

    C_values: list[float] = field(default_factory=list)
    C_tilde_values: list[float] = field(default_factory=list)
    L_values: list[float] = field(default_factory=list)
    M_values: list[float] = field(default_factory=list)
    good: list[bool] = field(default_factory=list)

    def append(self, C: float, L: float, M: float, good: bool) -> None:
        self.C_values.append(C)
        self.C_tilde_values.append(max(C, L))
        self.L_values.append(L)
        self.M_values.append(M)
        self.good.append(good)

    def __len__(self) -> int:
        return len(self.C_values)


def _degenerate(y: Point, x_tilde: Point) -> bool:
    return np.linalg.norm(y - x_tilde) <= DEGENERATE_STEP_RTOL * (1.0 + np.linalg.norm(x_tilde))


def observed_curvature(
    problem: ProblemOracle,
    y: Point,
    x_tilde: Point,
    f_y: float | None = None,
    f_x: float | None = None,
    g_x: Point | None = None,
    g_y: Point | None = None,
) -> float:
    """``2 [f(y) - f(x) - <grad f(x), y - x>] / ||y - x||^2``; 0 on a degenerate step.

    On tiny steps the bracket is lost to cancellation in the function values.
    When its rounding error bound is not small against the bracket itself, the
    gradient form ``<grad f(y) - grad f(x), y - x> / 2`` is used instead; the two
    differ by O(||y - x||^3) for smooth f and coincide for quadratics.
    """
    if _degenerate(y, x_tilde):
        return 0.0
    f_y = problem.f_value(y) if f_y is None else f_y
    f_x = problem.f_value(x_tilde) if f_x is None else f_x
    g_x = problem.f_gradient(x_tilde) if g_x is None else g_x
    d = y - x_tilde
    dd = float(d @ d)
    lin = float(g_x @ d)
    gap = f_y - f_x - lin
    if g_y is not None:
        noise = CANCELLATION_FACTOR * EPS * (abs(f_y) + abs(f_x) + abs(lin))
        trap = 0.5 * float((g_y - g_x) @ d)
        if noise > CANCELLATION_RTOL * max(abs(gap), abs(trap)):
            gap = trap
    return 2.0 * gap / dd


def lipschitz_estimate(
    problem: ProblemOracle,
    y: Point,
    x_tilde: Point,
    g_y: Point | None = None,
    g_x: Point | None = None,
) -> float:
    if _degenerate(y, x_tilde):
        return 0.0
    g_y = problem.f_gradient(y) if g_y is None else g_y
    g_x = problem.f_gradient(x_tilde) if g_x is None else g_x
    return float(np.linalg.norm(g_y - g_x) / np.linalg.norm(y - x_tilde))


def step_coefficients(A: float, M: float) -> tuple[float, float]:
    """Positive root ``a`` of ``M a^2 - a - A = 0`` and ``A + a``."""
    if A < 0 or not M > 0:
        raise ValueError(f"need A >= 0 and M > 0, got A={A}, M={M}")
    a = (1.0 + math.sqrt(1.0 + 4.0 * M * A)) / (2.0 * M)
    return a, A + a


def update_M(C_sum: float, k: int, config: SolverConfig) -> float:
    """Curvature estimate for iteration k+1 from the sum of C_0..C_k."""
    return max(config.M_floor, C_sum / (config.alpha * (k + 1)))


def replay_M(curvatures, config: SolverConfig) -> np.ndarray:
    """M_0, M_1, ... obtained by feeding a fixed curvature sequence to ``update_M``."""
    out = [config.M_start]
    total = 0.0
    for k, c in enumerate(curvatures):
        total += c
        out.append(update_M(total, k, config))
    return np.asarray(out)


@dataclass
class IterationOutcome:
    state: SolverState
    record: IterationRecord
    terminal: Optional[tuple[Point, Point]]
    x_tilde: Point
    y_good: Point
    v: Point
    C: float
    L: float
    is_good: bool
    phi_next: float


def initial_state(problem: ProblemOracle, config: SolverConfig, z0) -> SolverState:
    z = as_point(z0)
    if z.size != problem.dimension:
        raise ValueError(f"initial point has size {z.size}, expected {problem.dimension}")
    if not np.all(np.isfinite(z)):
        raise ValueError("initial point must be finite")
    if problem.h_value(z) == math.inf:
        z = problem.h_prox(z, INFEASIBLE_START_STEP)
    return SolverState(
        k=0, A=0.0, x=z.copy(), y=z, M_cur=config.M_start, phi_y=evaluate_phi(problem, z)
    )


def _oracle(fn, *args, k: int):
    try:
        out = fn(*args)
    except OracleError as exc:
        raise OracleError(str(exc), iteration=k) from exc
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise OracleError(f"{type(exc).__name__}: {exc}", iteration=k) from exc
    if isinstance(out, tuple):
        bad = any(not np.all(np.isfinite(o)) for o in out)
    else:
        bad = not np.all(np.isfinite(out))
    if bad:
        raise OracleError("oracle returned non-finite values", iteration=k)
    return out


def _iteration(
    state: SolverState,
    problem: ProblemOracle,
    config: SolverConfig,
    grad_z0_norm: float,
    variant: Variant,
    t0: float,
) -> IterationOutcome:
    k, A, M = state.k, state.A, state.M_cur
    x, y = state.x, state.y
    a, A_next = step_coefficients(A, M)
    x_tilde = (A * y + a * x) / A_next

    f_xt, g_xt = _oracle(problem.f_value_and_gradient, x_tilde, k=k)
    y_g = _oracle(problem.h_prox, x_tilde - g_xt / M, 1.0 / M, k=k)
    f_yg, g_yg = _oracle(problem.f_value_and_gradient, y_g, k=k)
    C = observed_curvature(problem, y_g, x_tilde, f_yg, f_xt, g_xt, g_yg)
    L = lipschitz_estimate(problem, y_g, x_tilde, g_yg, g_xt)
    v = M * (x_tilde - y_g) + g_yg - g_xt
    v_norm = float(np.linalg.norm(v))

    curvature = max(C, L) if variant == "ac_acg" else C
    is_good = curvature <= config.good_threshold * M

    if termination_value(v, grad_z0_norm, config.termination_mode) <= config.rho_hat:
        phi_g = float(f_yg) + float(problem.h_value(y_g))
        rec = IterationRecord(
            k=k, a_k=a, A_next=A_next, M_k=M, C_k=C, L_k=L, is_good=is_good,
            v_norm=v_norm, phi=phi_g, resolvents_this_iter=1, restarted=False,
            elapsed=time.perf_counter() - t0, terminal=True,
        )
        return IterationOutcome(state, rec, (y_g, v), x_tilde, y_g, v, C, L, is_good, phi_g)

    resolvents = 1
    if variant == "ac_acg":
        x_b = _oracle(problem.h_prox, x - a * g_xt, a, k=k)
        resolvents = 2
        x_next = x_b
        y_tilde = y_g if is_good else (A * y + a * x_b) / A_next
    elif is_good:
        # A_k / a_k is taken as 0 at A_k = 0 so the first step has no 0/0.
        ratio = A / a if A > 0 else 0.0
        x_next = _oracle(problem.omega_project, a * M * y_g - ratio * y, k=k)
        y_tilde = y_g
    else:
        x_b = _oracle(problem.h_prox, x - a * g_xt, a, k=k)
        resolvents = 2
        x_next = x_b
        y_tilde = (A * y + a * x_b) / A_next

    if y_tilde is y_g:
        phi_tilde = float(f_yg) + float(problem.h_value(y_g))
    else:
        phi_tilde = evaluate_phi(problem, y_tilde)

    if config.iterate_rule == "monotone" and not phi_tilde <= state.phi_y:
        y_next, phi_next = y, state.phi_y
    else:
        y_next, phi_next = y_tilde, phi_tilde

    C_sum = state.C_sum + curvature
    if variant == "fista_constant":
        M_next = M
    else:
        M_next = update_M(C_sum, k, config)

    new_state = SolverState(
        k=k + 1, A=A_next, x=x_next, y=y_next, M_cur=M_next, C_sum=C_sum,
        good_count=state.good_count + int(is_good),
        bad_count=state.bad_count + int(not is_good),
        resolvent_count=state.resolvent_count + resolvents,
        restarted_this_k=False, phi_y=phi_next,
    )
    rec = IterationRecord(
        k=k, a_k=a, A_next=A_next, M_k=M, C_k=C, L_k=L, is_good=is_good,
        v_norm=v_norm, phi=phi_next, resolvents_this_iter=resolvents, restarted=False,
        elapsed=time.perf_counter() - t0,
    )
    return IterationOutcome(new_state, rec, None, x_tilde, y_g, v, C, L, is_good, phi_next)


def ac_fista_iteration(
    state: SolverState,
    problem: ProblemOracle,
    config: SolverConfig,
    ledger: Optional[CurvatureLedger] = None,
    grad_z0_norm: float = 0.0,
    variant: Variant = "ac_fista",
) -> IterationOutcome:
    """One pass of steps 1-4. The ledger is extended only for non-terminal iterations."""
    out = _iteration(state, problem, config, grad_z0_norm, variant, time.perf_counter())
    if ledger is not None and out.terminal is None:
        ledger.append(out.C, out.L, state.M_cur, out.is_good)
    return out


def _run(
    problem: ProblemOracle,
    config: SolverConfig,
    z0,
    variant: Variant,
    method: str,
) -> SolverResult:
    t0 = time.perf_counter()
    state = initial_state(problem, config, z0)
    _, g0 = _oracle(problem.f_value_and_gradient, state.y, k=0)
    grad_z0_norm = float(np.linalg.norm(g0))
    ledger = CurvatureLedger()
    trace: list[IterationRecord] = []
    total_resolvents = 0
    best: Optional[IterationOutcome] = None
    terminal: Optional[IterationOutcome] = None

    executed = 0
    while state.k < config.max_iterations:
        out = _iteration(state, problem, config, grad_z0_norm, variant, t0)
        executed += 1
        total_resolvents += out.record.resolvents_this_iter
        if out.terminal is not None:
            trace.append(out.record)
            terminal = out
            break
        if best is None or out.record.v_norm < best.record.v_norm:
            best = out

        reject = (
            config.restart
            and out.is_good
            and out.phi_next >= state.phi_y
            and not state.restarted_this_k
            and not (state.A == 0.0 and np.array_equal(state.x, state.y))
        )
        if reject:
            trace.append(replace(out.record, restarted=True))
            state = replace(
                state, x=state.y.copy(), A=0.0, restarted_this_k=True,
                resolvent_count=state.resolvent_count + out.record.resolvents_this_iter,
            )
            continue

        ledger.append(out.C, out.L, state.M_cur, out.is_good)
        trace.append(out.record)
        state = out.state

    wall = time.perf_counter() - t0
    if config.trace_stride > 1:
        trace = [r for i, r in enumerate(trace) if i % config.trace_stride == 0 or r is trace[-1]]

    if terminal is not None:
        y_hat, v_hat = terminal.terminal
        chosen = terminal
        reason = "tolerance_met"
        final_phi = terminal.phi_next
    else:
        chosen = best
        y_hat, v_hat = best.y_good, best.v
        reason = "max_iterations"
        final_phi = state.phi_y
        logger.info("%s stopped at max_iterations=%d", method, config.max_iterations)

    return SolverResult(
        y_hat=y_hat,
        v_hat=v_hat,
        reason=reason,
        final_phi=final_phi,
        total_resolvents=total_resolvents,
        trace=trace,
        method=method,
        iterations=state.k,
        good_count=state.good_count,
        bad_count=state.bad_count,
        final_residual=termination_value(v_hat, grad_z0_norm, config.termination_mode),
        grad_z0_norm=grad_z0_norm,
        x_tilde_hat=chosen.x_tilde,
        M_hat=chosen.record.M_k,
        ledger=ledger,
        wall_seconds=wall,
        extra={"executed_iterations": executed},
    )


def run_ac_fista(problem: ProblemOracle, config: SolverConfig, z0) -> SolverResult:
    """AC-FISTA; ``config.restart`` selects the restart variant."""
    method = "ac_fista_restart" if config.restart else "ac_fista"
    return _run(problem, config, z0, "ac_fista", method)


def run_ac_acg(problem: ProblemOracle, config: SolverConfig, z0) -> SolverResult:
    """Theoretical AC-ACG: curvature from max(C_k, L_k), two resolvents every iteration."""
    method = "ac_acg_restart" if config.restart else "ac_acg"
    return _run(problem, config, z0, "ac_acg", method)


def run_fista_constant(
    problem: ProblemOracle, M_const: float, config: SolverConfig, z0
) -> SolverResult:
    if M_const < problem.curvature.L:
        raise ValueError(f"M_const={M_const} is below the Lipschitz constant {problem.curvature.L}")
    cfg = replace(config, M_init=M_const, M_cap=max(config.M_cap, M_const))
    return _run(problem, cfg, z0, "fista_constant", "fista_constant")
