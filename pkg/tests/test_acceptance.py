"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The desk-scale experiments run once per session from the configs in
``configs/`` and are shared by the criteria that inspect them.
"""

import dataclasses
import filecmp
import itertools
import os
from pathlib import Path

import numpy as np
import pytest

from acfista.bench import load_config, run_experiment
from acfista.core import SolverConfig, check_stationarity, default_stationarity_tol, evaluate_phi
from acfista.diagnostics import theta_tau_series
from acfista.problems import (
    calibrated,
    generate_mc,
    generate_qp,
    generate_quadratic,
    generate_svm,
    mc_instance,
    mc_oracle,
    qp_oracle,
    quadratic_oracle,
    svm_initial_point,
    svm_oracle,
)
from acfista.prox import project_simplex, prox_l1_l2ball
from acfista.solver import ac_fista_iteration, initial_state, run_ac_acg, run_ac_fista, run_fista_constant

from conftest import record_criterion
from test_problems import fd_gradient, rel_err, sym_vec
from test_prox import l1_ball_grid_oracle, simplex_brute_force

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run_config(name, out_dir):
    exp = dataclasses.replace(load_config(CONFIGS / f"{name}.json"), output_dir=str(out_dir))
    return {run.spec.label: run for run in run_experiment(exp)[0].runs}, exp


@pytest.fixture(scope="session")
def desk(tmp_path_factory):
    base = tmp_path_factory.mktemp("desk")
    return {name: run_config(name, base / name)[0] for name in ("desk_svm", "desk_qp", "desk_mc", "quadratic")}


@pytest.fixture(scope="session")
def quadratic_runs():
    """Extra runs on the convex quadratic family with various settings."""
    runs = []
    for seed, gamma, restart, rule in itertools.product((1, 2), (1e-6, 0.01, 1.0), (False, True),
                                                          ("non_monotone", "monotone")):
        inst = generate_quadratic(15, seed=seed, eig_min=0.5, eig_max=20.0)
        prob = quadratic_oracle(inst)
        cfg = SolverConfig(M_cap=prob.curvature.M / 0.9, gamma=gamma, restart=restart, iterate_rule=rule)
        z0 = np.random.default_rng(seed).normal(size=15)
        runs.append((prob, cfg, z0, run_ac_fista(prob, cfg, z0)))
        runs.append((prob, cfg, z0, run_ac_acg(prob, cfg, z0)))
    return runs


def all_runs(desk, quadratic_runs):
    for exp in desk.values():
        for run in exp.values():
            yield run.config, run.result
    for _, cfg, _, res in quadratic_runs:
        yield cfg, res


def test_criterion_01_recurrence(desk, quadratic_runs):
    worst_rel, floor_ok, count = 0.0, True, 0
    for cfg, res in all_runs(desk, quadratic_runs):
        for r in res.trace:
            worst_rel = max(worst_rel, abs(r.A_next - r.M_k * r.a_k**2) / r.A_next)
            floor_ok &= r.M_k >= cfg.M_floor
            count += 1
    ok = worst_rel <= 1e-12 and floor_ok
    record_criterion(1, ok, f"max |A_k+1 - M_k a_k^2|/A_k+1 = {worst_rel:.2e} over {count} records, floor ok={floor_ok}")
    assert ok


def test_criterion_02_theta_tau_bounds(desk, quadratic_runs):
    failures, count = [], 0
    for cfg, res in all_runs(desk, quadratic_runs):
        if len(res.ledger) < 2:
            continue
        theta, tau = theta_tau_series(res.ledger)
        k = np.arange(1, theta.size + 1)
        L_bar = max(res.ledger.L_values)
        tau_cap = L_bar / cfg.M_floor
        if np.any(theta < (k - 1) / (2 * k) * (1 - 1e-12)) or np.any(tau > tau_cap * (1 + 1e-12)):
            failures.append(res.method)
        count += 1
    ok = not failures
    record_criterion(2, ok, f"theta_k >= (k-1)/(2k) and tau_k <= L/(gamma M_cap) on {count} traces; failures={failures}")
    assert ok


def test_criterion_03_fista_equivalence():
    inst = generate_quadratic(20, seed=8)
    prob = quadratic_oracle(inst)
    assert inst.radius is None and inst.omega_radius == 1e6
    cfg = SolverConfig(M_cap=prob.curvature.M / 0.9, iterate_rule="non_monotone")
    state = initial_state(prob, cfg, np.full(20, 3.0))
    worst, good = 0.0, 0
    for _ in range(400):
        out = ac_fista_iteration(state, prob, cfg)
        if out.terminal is not None:
            break
        if out.is_good:
            y_new, y_old = out.state.y, state.y
            fista_x = y_new + (state.A / out.record.a_k) * (y_new - y_old)
            worst = max(worst, float(np.max(np.abs(out.state.x - fista_x))))
            good += 1
        state = out.state
    ok = worst <= 1e-10 and good > 0
    record_criterion(3, ok, f"max deviation from the FISTA x-update {worst:.2e} over {good} good iterations")
    assert ok


def test_criterion_04_stationarity_certificate(desk, quadratic_runs):
    checked, bad = 0, []
    pairs = []
    for name in ("desk_svm", "desk_qp"):
        for label, run in desk[name].items():
            pairs.append((f"{name}/{label}", run))
    for tag, run in pairs:
        res = run.result
        if res.reason != "tolerance_met":
            continue
        assert run.config.termination_mode == "relative" and run.config.rho_hat == 1e-7
        prob = _oracle_for_desk(tag)
        tol = default_stationarity_tol(res.y_hat)
        good = check_stationarity(prob, res.y_hat, res.v_hat, res.M_hat, res.x_tilde_hat, tol) and res.final_residual <= 1e-7
        checked += 1
        if not good:
            bad.append(tag)
    for prob, cfg, _, res in quadratic_runs:
        assert cfg.termination_mode == "relative" and cfg.rho_hat == 1e-7
        good = res.reason == "tolerance_met" and res.final_residual <= 1e-7 and check_stationarity(
            prob, res.y_hat, res.v_hat, res.M_hat, res.x_tilde_hat)
        checked += 1
        if not good:
            bad.append(res.method)
    ok = not bad and checked > 0
    record_criterion(4, ok, f"{checked} returned pairs certified at relative rho=1e-7; failures={bad}")
    assert ok


_DESK_ORACLES = {}


def _oracle_for_desk(tag):
    name = tag.split("/")[0]
    if name not in _DESK_ORACLES:
        from acfista.bench.runner import build_problem

        exp = load_config(CONFIGS / f"{name}.json")
        _DESK_ORACLES[name] = build_problem(exp.problems[0], exp.seed).oracle
    return _DESK_ORACLES[name]


def test_criterion_05_prox_oracles():
    rng = np.random.default_rng(2024)
    simplex_err = 0.0
    for case in range(200):
        v = rng.normal(scale=2.0, size=1 + case % 8)
        simplex_err = max(simplex_err, float(np.max(np.abs(project_simplex(v) - simplex_brute_force(v)))))
    ball_err = 0.0
    for case in range(50):
        d = 2 + case % 2
        sigma, lam, R = rng.uniform(0, 4, size=d), rng.uniform(0, 1.5), rng.uniform(0.2, 3.0)
        ball_err = max(ball_err, float(np.max(np.abs(prox_l1_l2ball(sigma, lam, R) - l1_ball_grid_oracle(sigma, lam, R)))))
    ok = simplex_err <= 1e-10 and ball_err <= 1e-6
    record_criterion(5, ok, f"simplex vs brute force {simplex_err:.1e} (200 cases); l1+ball vs grid/PG {ball_err:.1e} (50 cases)")
    assert ok


def test_criterion_06_gradient_checks():
    rng = np.random.default_rng(6)
    svm = generate_svm(80, 40, 0.1, 1 / 40, 5.0, seed=6)
    svm_prob = svm_oracle(svm)
    qp = calibrated(generate_qp(5, 6, 0.3, seed=6), 1e2, 10.0)
    qp_prob = qp_oracle(qp)
    mc = mc_instance(generate_mc(6, 8, 2, 0.5, (1.0, 5.0), 6), 1.0, 2.0, 1.0, 5.0)
    mc_prob = mc_oracle(mc)
    errs = {"svm": 0.0, "qp": 0.0, "mc": 0.0}
    for _ in range(20):
        z = svm_initial_point(svm, int(rng.integers(1 << 30)))
        errs["svm"] = max(errs["svm"], rel_err(svm_prob.f_gradient(z), fd_gradient(svm_prob.f_value, z)))
        z = sym_vec(rng, qp.n)
        errs["qp"] = max(errs["qp"], rel_err(qp_prob.f_gradient(z), fd_gradient(qp_prob.f_value, z, h=1e-5)))
        z = rng.normal(size=48)
        errs["mc"] = max(errs["mc"], rel_err(mc_prob.f_gradient(z), fd_gradient(mc_prob.f_value, z)))
    ok = errs["svm"] <= 1e-5 and errs["qp"] <= 1e-5 and errs["mc"] <= 1e-4
    record_criterion(6, ok, "max relative FD error " + ", ".join(f"{k}={v:.1e}" for k, v in errs.items()))
    assert ok


def test_criterion_07_desk_svm(desk):
    parts, ok = [], True
    for label in ("ac_fista", "ac_fista_restart"):
        run = desk["desk_svm"][label]
        res, d = run.result, run.diagnostics
        good = (res.reason == "tolerance_met" and res.iterations <= 5000 and d.bad_fraction <= 0.45
                and d.mean_resolvents_per_iteration <= 1.5)
        ok &= good
        parts.append(f"{label}: {res.reason} k={res.iterations} bad={d.bad_fraction:.3f} "
                     f"res/it={d.mean_resolvents_per_iteration:.3f}")
    rows = desk["desk_svm"]
    parts.append(f"(restart iterations {rows['ac_fista_restart'].row.iterations} vs {rows['ac_fista'].row.iterations}, recorded only)")
    record_criterion(7, ok, "; ".join(parts))
    assert ok


def test_criterion_08_desk_qp(desk):
    run = desk["desk_qp"]["ac_fista"]
    res, d = run.result, run.diagnostics
    ok = (res.reason == "tolerance_met" and res.iterations <= 5000 and not d.short_run
          and 0.4 <= d.theta_bar <= 3 and d.tau_bar <= 4)
    record_criterion(8, ok, f"{res.reason} k={res.iterations} theta_bar={d.theta_bar:.3f} tau_bar={d.tau_bar:.3f}")
    assert ok


def test_criterion_09_desk_mc(desk):
    run = desk["desk_mc"]["ac_fista"]
    res = run.result
    prob = _oracle_for_desk("desk_mc/ac_fista")
    c = prob.curvature
    assert c.m == pytest.approx(4.0) and c.L == pytest.approx(4.0)
    max_L = max(r.L_k for r in res.trace)
    ok = (res.reason == "tolerance_met" and res.iterations <= 3000 and run.config.rho_hat == 5e-4
          and run.config.termination_mode == "relative" and res.final_residual <= 5e-4 and max_L <= c.L + 1e-6)
    record_criterion(9, ok, f"{res.reason} k={res.iterations} residual={res.final_residual:.2e} max L_k={max_L:.4f} <= {c.L}")
    assert ok


def test_criterion_10_baseline_evaluations(desk):
    af, acg = desk["desk_qp"]["ac_fista"].result, desk["desk_qp"]["ac_acg"].result
    led = af.ledger
    dominated = all(ct >= cc for ct, cc in zip(led.C_tilde_values, led.C_values))
    ok = af.total_resolvents < acg.total_resolvents and dominated
    record_criterion(10, ok, f"resolvents AC-FISTA {af.total_resolvents} < AC-ACG {acg.total_resolvents}; "
                             f"C_tilde >= C on {len(led)} ledger entries: {dominated}")
    assert ok


def test_criterion_11_gamma_one_all_good():
    counts = []
    for seed in range(5):
        inst = generate_quadratic(25, seed=seed, eig_min=-3.0 if seed % 2 else 1.0, eig_max=40.0, radius=5.0)
        prob = quadratic_oracle(inst)
        cfg = SolverConfig(gamma=1.0, M_cap=prob.curvature.M / 0.9, max_iterations=3000)
        assert 0.9 * cfg.M_cap >= prob.curvature.M * (1 - 1e-12)
        res = run_ac_fista(prob, cfg, np.random.default_rng(seed).normal(size=25))
        counts.append(res.bad_count)
    ok = all(c == 0 for c in counts)
    record_criterion(11, ok, f"bad_count per run with gamma=1: {counts}")
    assert ok


def test_criterion_12_monotone_descent():
    worst, runs = -np.inf, 0
    from acfista.bench.runner import build_problem

    for name in ("desk_svm", "desk_qp", "desk_mc"):
        exp = load_config(CONFIGS / f"{name}.json")
        bp = build_problem(exp.problems[0], exp.seed)
        prob = bp.oracle
        for runner, gamma in ((run_ac_fista, 1e-6), (run_ac_acg, 0.01)):
            cfg = SolverConfig(M_cap=prob.curvature.M / 0.9, gamma=gamma, iterate_rule="monotone",
                               rho_hat=exp.solver_defaults["rho_hat"], max_iterations=600)
            res = runner(prob, cfg, bp.z0)
            phis = [evaluate_phi(prob, initial_state(prob, cfg, bp.z0).y)]
            phis += [r.phi for r in res.trace if not r.terminal and not r.restarted]
            worst = max(worst, max(b - a for a, b in zip(phis, phis[1:])))
            runs += 1
    for seed in range(3):
        prob = quadratic_oracle(generate_quadratic(15, seed=seed, eig_min=-2.0, eig_max=10.0, radius=3.0))
        cfg = SolverConfig(M_cap=prob.curvature.M / 0.9, iterate_rule="monotone")
        z0 = np.random.default_rng(seed).normal(size=15)
        res = run_ac_fista(prob, cfg, z0)
        phis = [evaluate_phi(prob, initial_state(prob, cfg, z0).y)] + [r.phi for r in res.trace if not r.terminal]
        worst = max(worst, max(b - a for a, b in zip(phis, phis[1:])))
        runs += 1
    ok = worst <= 1e-10
    record_criterion(12, ok, f"max phi(y_k+1) - phi(y_k) = {worst:.2e} over {runs} monotone runs")
    assert ok


def test_criterion_13_determinism(tmp_path):
    mismatched, compared = [], 0
    for name in ("desk_svm", "desk_qp", "desk_mc", "quadratic"):
        run_config(name, tmp_path / "a" / name)
        run_config(name, tmp_path / "b" / name)
        for root, _, files in os.walk(tmp_path / "a" / name):
            for f in files:
                if f == "metadata.json":
                    continue
                a = Path(root) / f
                b = tmp_path / "b" / name / a.relative_to(tmp_path / "a" / name)
                compared += 1
                if not filecmp.cmp(a, b, shallow=False):
                    mismatched.append(str(a.relative_to(tmp_path)))
    ok = not mismatched and compared > 0
    record_criterion(13, ok, f"{compared} trace/summary/report files byte-identical across reruns; mismatches={mismatched}")
    assert ok
