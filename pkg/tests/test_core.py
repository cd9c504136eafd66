import math

import numpy as np
import pytest

from acfista.core import (
    CurvatureTriple,
    OracleError,
    SolverConfig,
    check_stationarity,
    default_stationarity_tol,
    evaluate_phi,
    termination_value,
)
from acfista.prox import composite_resolvent

from conftest import ball_oracle, half_sq, quartic_interval, toy_oracle


def test_phi_half_square():
    assert evaluate_phi(half_sq(), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_phi_infeasible_point_is_inf():
    prob = ball_oracle(lambda z: 0.0, lambda z: np.zeros(2), 1.0, 2)
    assert evaluate_phi(prob, np.array([2.0, 0.0])) == math.inf


def test_phi_quartic():
    assert evaluate_phi(quartic_interval(), np.array([1.0])) == pytest.approx(-0.25, abs=1e-15)


def test_phi_nonfinite_f_raises():
    prob = toy_oracle(lambda z: float("nan"), lambda z: z)
    with pytest.raises(OracleError):
        evaluate_phi(prob, np.zeros(2))


def test_stationarity_of_resolvent_output():
    prob = quartic_interval()
    xt, M = np.array([1.7]), 5.0
    y = composite_resolvent(prob, xt, M)
    v = M * (xt - y) + prob.f_gradient(y) - prob.f_gradient(xt)
    assert check_stationarity(prob, y, v, M, xt)


def test_stationarity_rejects_perturbed_point():
    prob = half_sq()
    xt, M = np.array([2.0, 0.5]), 3.0
    y = composite_resolvent(prob, xt, M)
    tol = default_stationarity_tol(y)
    y_bad = y + np.array([10 * tol, 0.0])
    assert not check_stationarity(prob, y_bad, np.zeros(2), M, xt)


def test_stationarity_gradient_step_to_minimizer():
    prob = half_sq()
    y = np.zeros(2)
    assert check_stationarity(prob, y, np.zeros(2), 1.0, np.array([2.0, 0.0]))


@pytest.mark.parametrize(
    "v, gz0, mode, expected",
    [((3, 4), 4.0, "relative", 1.0), ((3, 4), 4.0, "absolute", 5.0),
     ((0, 0), 4.0, "relative", 0.0), ((0, 0), 4.0, "absolute", 0.0)],
)
def test_termination_value(v, gz0, mode, expected):
    assert termination_value(np.array(v, float), gz0, mode) == pytest.approx(expected)


def test_curvature_triple_requires_dominating_L():
    with pytest.raises(ValueError):
        CurvatureTriple(m=2.0, M=1.0, L=1.5)


@pytest.mark.parametrize(
    "kw",
    [{"alpha": 0.0}, {"alpha": 1.5}, {"gamma": 0.0}, {"gamma": 2.0}, {"M_cap": -1.0},
     {"rho_hat": 0.0}, {"termination_mode": "both"}, {"iterate_rule": "greedy"},
     {"max_iterations": 0}, {"trace_stride": 0}],
)
def test_solver_config_rejects(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_solver_config_start_and_floor():
    cfg = SolverConfig(M_cap=13.0, gamma=1e-6)
    assert cfg.M_start == pytest.approx(0.13)
    assert cfg.M_floor == pytest.approx(1.3e-5)
    assert SolverConfig(M_cap=2.0, gamma=1.0).M_start == 2.0
    assert SolverConfig(M_init=4.0).M_start == 4.0
