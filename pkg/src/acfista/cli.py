"""``acfista`` command line: run, validate, gen-instance."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bench.config import ConfigError, FAMILIES, parse_config, read_document, validate_document
from .bench.runner import ExperimentError, run_experiment
from .core import OracleError
from .problems import generate_mc, generate_qp, generate_quadratic, generate_svm, mc_instance, save_instance
from .problems.qp import CalibrationError, calibrated
from .problems.mc import RatingsParseError


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acfista", description="Average-curvature FISTA experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="{run,validate,gen-instance}")
    sub.required = True

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--max-iter", type=_positive_int, help="override max_iterations for every solver")
    run.add_argument("--tol", type=_positive_float, help="override rho_hat for every solver")
    run.add_argument("--mode", choices=("abs", "rel"), help="termination test: absolute or relative")
    run.add_argument("--out-dir", help="override output_dir")
    run.add_argument("--seed", type=int, help="override the experiment seed")
    run.add_argument("--figures", action="store_true", help="also render PNG figures per problem")
    run.add_argument("--with-timings", action="store_true",
                     help="add wall-clock columns to trace and summary CSVs (breaks byte reproducibility)")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    gen = sub.add_parser("gen-instance", help="generate a problem instance and save it as JSON")
    gen.add_argument("family", choices=FAMILIES)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--n", type=_positive_int, help="svm: samples; qp: matrix order; mc: columns; quadratic: dimension")
    gen.add_argument("--p", type=_positive_int, help="svm: features")
    gen.add_argument("--l", type=_positive_int, help="qp: operator count; mc: rows")
    gen.add_argument("--density", type=_positive_float)
    gen.add_argument("--lambda", dest="lam", type=float, help="svm: regularization (default 1/p)")
    gen.add_argument("--r", type=_positive_float, default=50.0, help="svm: ball radius")
    gen.add_argument("--M-target", dest="M_target", type=_positive_float, help="qp: calibrate to this upper curvature")
    gen.add_argument("--m-target", dest="m_target", type=float, help="qp: calibrate to this lower curvature")
    gen.add_argument("--rank", type=_positive_int, help="mc: rank of the generating matrix")
    gen.add_argument("--scale", type=float, nargs=2, default=(1.0, 5.0), metavar=("LO", "HI"), help="mc: rating range")
    gen.add_argument("--mu", type=float, default=1.0)
    gen.add_argument("--beta", type=float, default=2.0)
    gen.add_argument("--tau", type=float, default=1.0)
    gen.add_argument("--eig-min", type=float, default=1.0, help="quadratic: smallest Hessian eigenvalue")
    gen.add_argument("--eig-max", type=float, default=10.0, help="quadratic: largest Hessian eigenvalue")
    gen.add_argument("--radius", type=_positive_float, help="quadratic: constrain to a ball")
    return parser


def _require(parser, args, family: str, names: Sequence[str]) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        parser.error(f"gen-instance {family} needs {' '.join(missing)}")


def _gen_instance(parser, args) -> int:
    fam = args.family
    if fam == "svm":
        _require(parser, args, fam, ("n", "p", "density"))
        lam = args.lam if args.lam is not None else 1.0 / args.p
        inst = generate_svm(args.n, args.p, args.density, lam, args.r, args.seed)
    elif fam == "qp":
        _require(parser, args, fam, ("l", "n", "density"))
        inst = generate_qp(args.l, args.n, args.density, args.seed)
        if args.M_target is not None:
            inst = calibrated(inst, args.M_target, args.m_target if args.m_target is not None else 0.0)
    elif fam == "mc":
        _require(parser, args, fam, ("l", "n", "rank", "density"))
        ratings = generate_mc(args.l, args.n, args.rank, args.density, tuple(args.scale), args.seed)
        inst = mc_instance(ratings, args.mu, args.beta, args.tau, args.scale[1], args.seed)
    else:
        _require(parser, args, fam, ("n",))
        inst = generate_quadratic(args.n, args.seed, args.eig_min, args.eig_max, args.radius)
    save_instance(inst, args.out)
    print(f"wrote {fam} instance to {args.out}")
    return 0


def _run(args) -> int:
    doc = read_document(args.config)
    base = os.path.dirname(os.path.abspath(args.config))
    exp = parse_config(doc, base, Path(args.config).stem)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out_dir is not None:
        changes["output_dir"] = os.path.abspath(args.out_dir)
    if args.figures:
        changes["figures"] = True
    if args.with_timings:
        changes["include_timings"] = True
    exp = dataclasses.replace(exp, **changes)
    overrides = {}
    if args.max_iter is not None:
        overrides["max_iterations"] = args.max_iter
    if args.tol is not None:
        overrides["rho_hat"] = args.tol
    if args.mode is not None:
        overrides["termination_mode"] = "absolute" if args.mode == "abs" else "relative"
    outcomes = run_experiment(exp, overrides)
    for out in outcomes:
        for run in out.runs:
            print(f"{out.problem.label:>14} {run.spec.label:>18}  {run.result.reason:<16}"
                  f" iters={run.row.iterations:<6} resolvents={run.result.total_resolvents}")
    print(f"outputs in {exp.output_dir}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            doc = read_document(args.config)
            errors = validate_document(doc, os.path.dirname(os.path.abspath(args.config)))
            if errors:
                for e in errors:
                    print(f"error: {e}", file=sys.stderr)
                return 1
            print(f"{args.config}: ok")
            return 0
        if args.command == "gen-instance":
            return _gen_instance(parser, args)
        return _run(args)
    except (ConfigError, ExperimentError, OracleError, CalibrationError, RatingsParseError, ValueError) as exc:
        print(f"acfista: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
