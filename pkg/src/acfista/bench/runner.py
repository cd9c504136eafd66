"""Build instances from an experiment config, run every solver, write the outputs.

Layout of ``output_dir``::

    metadata.json                  timestamps, versions and wall times
    <problem>/summary.csv          one SummaryRow per solver, config order
    <problem>/trace_<solver>.csv   per-iteration records
    <problem>/report.json          problem description + DiagnosticsReport per solver
    <problem>/figures/*.png        only with figures enabled

Everything except ``metadata.json`` (and timing columns, when requested) is a
deterministic function of the config and seed.
"""

from __future__ import annotations

import datetime as _dt
import logging
import os
import platform
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
import scipy

from .. import __version__
from ..core import OracleError, ProblemOracle, SolverConfig, SolverResult
from ..diagnostics import DiagnosticsReport, diagnose
from ..problems import (
    McInstance,
    QpInstance,
    QuadraticInstance,
    SvmInstance,
    calibrated,
    generate_mc,
    generate_qp,
    generate_quadratic,
    generate_svm,
    load_instance,
    load_ratings,
    mc_initial_point,
    mc_instance,
    mc_oracle,
    qp_initial_point,
    qp_oracle,
    quadratic_oracle,
    svm_initial_point,
    svm_oracle,
)
from ..solver import run_ac_acg, run_ac_fista, run_fista_constant
from .config import METHOD_DEFAULTS, ExperimentConfig, ProblemSpec, SolverSpec, load_config
from .report import SummaryRow, dumps_json, emit_summary_table, emit_trace_csv, summary_row

logger = logging.getLogger(__name__)


class ExperimentError(RuntimeError):
    pass


@dataclass
class BuiltProblem:
    label: str
    family: str
    instance: Any
    oracle: ProblemOracle
    z0: np.ndarray
    params: dict


@dataclass
class SolverRun:
    spec: SolverSpec
    config: SolverConfig
    result: SolverResult
    diagnostics: DiagnosticsReport
    row: SummaryRow


@dataclass
class ProblemOutcome:
    problem: BuiltProblem
    runs: list[SolverRun] = field(default_factory=list)


def _family_of(inst) -> str:
    return {SvmInstance: "svm", QpInstance: "qp", McInstance: "mc", QuadraticInstance: "quadratic"}[type(inst)]


def build_problem(spec: ProblemSpec, seed: int) -> BuiltProblem:
    """Instance, oracle and the shared initial point for one problem entry.

    The generator seed is ``params["seed"]`` when given, else the experiment
    seed; random initial points use that seed plus one.
    """
    p = dict(spec.params)
    inst_seed = int(p.get("seed", seed))
    init_seed = inst_seed + 1

    if spec.instance_file is not None:
        inst = load_instance(spec.instance_file)
        family = _family_of(inst)
        if family == "qp" and inst.M_target is None and "M_target" in p:
            inst = calibrated(inst, float(p["M_target"]), float(p["m_target"]))
    else:
        family = spec.family
        if family == "svm":
            n, pp = int(p["n"]), int(p["p"])
            inst = generate_svm(n, pp, float(p["density"]), float(p.get("lambda", 1.0 / pp)),
                                float(p.get("r", 50.0)), inst_seed)
        elif family == "qp":
            raw = generate_qp(int(p["l"]), int(p["n"]), float(p["density"]), inst_seed)
            inst = calibrated(raw, float(p["M_target"]), float(p["m_target"]))
        elif family == "mc":
            if spec.ratings_file is not None:
                ratings = load_ratings(spec.ratings_file)
                scale_max = float(p.get("scale_max", ratings.values.max()))
            else:
                lo, hi = p.get("scale", (1.0, 5.0))
                ratings = generate_mc(int(p["l"]), int(p["n"]), int(p["rank"]), float(p["density"]),
                                      (float(lo), float(hi)), inst_seed)
                scale_max = float(p.get("scale_max", hi))
            inst = mc_instance(ratings, float(p["mu"]), float(p["beta"]), float(p["tau"]),
                               scale_max, inst_seed)
        elif family == "quadratic":
            r = p.get("radius")
            inst = generate_quadratic(int(p["n"]), inst_seed, float(p.get("eig_min", 1.0)),
                                      float(p.get("eig_max", 10.0)), None if r is None else float(r))
        else:
            raise ExperimentError(f"unknown family {family!r}")

    if family == "svm":
        oracle, z0 = svm_oracle(inst), svm_initial_point(inst, init_seed)
    elif family == "qp":
        oracle, z0 = qp_oracle(inst, omega=p.get("omega", "psd_ball")), qp_initial_point(inst.n)
    elif family == "mc":
        oracle, z0 = mc_oracle(inst), mc_initial_point(inst, init_seed)
    else:
        oracle = quadratic_oracle(inst)
        z0 = np.zeros(inst.dimension) if "start" not in p else np.full(inst.dimension, float(p["start"]))
    return BuiltProblem(spec.label, family, inst, oracle, z0, p)


def solver_config(
    spec: SolverSpec,
    problem: BuiltProblem,
    exp: ExperimentConfig,
    overrides: Optional[dict] = None,
) -> SolverConfig:
    curv = problem.oracle.curvature
    upper = curv.M if curv.M > 0 else max(curv.L, 1e-12)
    base = {"M_cap": upper / 0.9, "seed": exp.seed, "trace_stride": exp.trace_stride}
    base.update(METHOD_DEFAULTS[spec.method])
    base.update(exp.solver_defaults)
    base.update(spec.overrides)
    base.update(overrides or {})
    return SolverConfig(**base)


def run_solver(spec: SolverSpec, problem: BuiltProblem, config: SolverConfig) -> SolverResult:
    oracle, z0 = problem.oracle, problem.z0
    try:
        if spec.method in ("ac_fista", "ac_fista_restart"):
            return run_ac_fista(oracle, config, z0)
        if spec.method in ("ac_acg", "ac_acg_restart"):
            return run_ac_acg(oracle, config, z0)
        if spec.method == "fista_constant":
            M_const = spec.M_const if spec.M_const is not None else oracle.curvature.L / 0.9
            return run_fista_constant(oracle, float(M_const), config, z0)
    except OracleError as exc:
        where = f" at iteration {exc.iteration}" if exc.iteration is not None else ""
        raise ExperimentError(f"solver {spec.label!r} failed{where}: {exc}") from exc
    raise ExperimentError(f"unknown method {spec.method!r}")


def _problem_summary(bp: BuiltProblem) -> dict:
    c = bp.oracle.curvature
    return {
        "label": bp.label,
        "family": bp.family,
        "params": bp.params,
        "dimension": bp.oracle.dimension,
        "shape": list(bp.oracle.shape) if bp.oracle.shape else None,
        "curvature": {"m": c.m, "M": c.M, "L": c.L},
    }


def _config_dict(cfg: SolverConfig) -> dict:
    d = asdict(cfg)
    d["M_start"] = cfg.M_start
    return d


def run_experiment(
    config: ExperimentConfig | str | os.PathLike,
    overrides: Optional[dict] = None,
) -> list[ProblemOutcome]:
    """Run every solver on every problem and write the output files."""
    exp = config if isinstance(config, ExperimentConfig) else load_config(config)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    os.makedirs(exp.output_dir, exist_ok=True)
    outcomes: list[ProblemOutcome] = []
    timings: dict[str, dict[str, float]] = {}

    for pspec in exp.problems:
        problem = build_problem(pspec, exp.seed)
        outcome = ProblemOutcome(problem)
        pdir = os.path.join(exp.output_dir, problem.label)
        os.makedirs(pdir, exist_ok=True)
        for sspec in exp.solvers:
            cfg = solver_config(sspec, problem, exp, overrides)
            logger.info("running %s on %s", sspec.label, problem.label)
            result = run_solver(sspec, problem, cfg)
            diag = diagnose(result)
            outcome.runs.append(SolverRun(sspec, cfg, result, diag, summary_row(sspec.label, result, diag)))
            with open(os.path.join(pdir, f"trace_{sspec.label}.csv"), "w", encoding="utf-8", newline="") as fh:
                fh.write(emit_trace_csv(result.trace, exp.include_timings))
        timings[problem.label] = {r.spec.label: r.result.wall_seconds for r in outcome.runs}

        rows = [r.row for r in outcome.runs]
        with open(os.path.join(pdir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(emit_summary_table(rows, exp.include_timings))
        report = {
            "experiment": exp.name,
            "seed": exp.seed,
            "problem": _problem_summary(problem),
            "solvers": [
                {
                    "label": r.spec.label,
                    "method": r.spec.method,
                    "config": _config_dict(r.config),
                    "reason": r.result.reason,
                    "iterations": r.row.iterations,
                    "accepted_iterations": r.result.iterations,
                    "good_count": r.result.good_count,
                    "bad_count": r.result.bad_count,
                    "resolvent_evaluations": r.result.total_resolvents,
                    "final_objective": r.result.final_phi,
                    "final_residual": r.result.final_residual,
                    "grad_z0_norm": r.result.grad_z0_norm,
                    "diagnostics": r.diagnostics.to_dict(),
                }
                for r in outcome.runs
            ],
        }
        with open(os.path.join(pdir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(dumps_json(report))
        if exp.figures:
            from .figures import render_problem_figures

            render_problem_figures(outcome, os.path.join(pdir, "figures"))
        outcomes.append(outcome)

    metadata = {
        "experiment": exp.name,
        "started_at": started,
        "finished_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "acfista": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "wall_seconds": timings,
    }
    with open(os.path.join(exp.output_dir, "metadata.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps_json(metadata))
    return outcomes
