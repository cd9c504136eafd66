"""Experiment configuration: JSON parsing and schema checks."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..core import SolverConfig

METHODS = ("ac_fista", "ac_fista_restart", "ac_acg", "ac_acg_restart", "fista_constant")
FAMILIES = ("svm", "qp", "mc", "quadratic")
SOLVER_FIELDS = set(SolverConfig.__dataclass_fields__)

# Per-method parameter defaults applied before the user's overrides.
METHOD_DEFAULTS: dict[str, dict[str, Any]] = {
    "ac_fista": {"alpha": 0.5, "gamma": 1e-6, "restart": False},
    "ac_fista_restart": {"alpha": 0.5, "gamma": 1e-6, "restart": True},
    "ac_acg": {"alpha": 0.5, "gamma": 0.01, "restart": False},
    "ac_acg_restart": {"alpha": 0.5, "gamma": 0.01, "restart": True},
    "fista_constant": {"restart": False},
}

REQUIRED_PARAMS = {
    "svm": ("n", "p", "density"),
    "qp": ("l", "n", "density", "M_target", "m_target"),
    "mc": ("mu", "beta", "tau"),
    "quadratic": ("n",),
}


class ConfigError(ValueError):
    pass


@dataclass
class SolverSpec:
    method: str
    label: str
    overrides: dict[str, Any] = field(default_factory=dict)
    M_const: Optional[float] = None


@dataclass
class ProblemSpec:
    family: Optional[str]
    label: str
    params: dict[str, Any] = field(default_factory=dict)
    ratings_file: Optional[str] = None
    instance_file: Optional[str] = None


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    output_dir: str
    problems: list[ProblemSpec]
    solvers: list[SolverSpec]
    solver_defaults: dict[str, Any] = field(default_factory=dict)
    trace_stride: int = 1
    include_timings: bool = False
    figures: bool = False
    base_dir: str = "."


def _resolve(base: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base, path)


def validate_document(doc: Any, base_dir: str = ".") -> list[str]:
    """Return a list of schema problems; empty when the document is usable."""
    errors: list[str] = []
    if not isinstance(doc, dict):
        return ["config must be a JSON object"]
    known = {"name", "seed", "output_dir", "problem", "problems", "solvers",
             "solver_defaults", "trace_stride", "include_timings", "figures"}
    for key in doc:
        if key not in known:
            errors.append(f"unknown top-level key {key!r}")
    if "seed" in doc and not isinstance(doc["seed"], int):
        errors.append("seed must be an integer")
    if "trace_stride" in doc and (not isinstance(doc["trace_stride"], int) or doc["trace_stride"] < 1):
        errors.append("trace_stride must be a positive integer")

    problems = doc.get("problems", [doc["problem"]] if "problem" in doc else None)
    if not problems or not isinstance(problems, list):
        errors.append("at least one problem is required ('problem' or 'problems')")
        problems = []
    for i, p in enumerate(problems):
        where = f"problems[{i}]"
        if not isinstance(p, dict):
            errors.append(f"{where} must be an object")
            continue
        if "instance_file" in p:
            if not os.path.exists(_resolve(base_dir, p["instance_file"])):
                errors.append(f"{where}: instance file {p['instance_file']!r} not found")
            continue
        fam = p.get("family")
        if fam not in FAMILIES:
            errors.append(f"{where}: family must be one of {FAMILIES}, got {fam!r}")
            continue
        params = p.get("params", {})
        if not isinstance(params, dict):
            errors.append(f"{where}: params must be an object")
            continue
        if fam == "mc" and "ratings_file" in p:
            if not os.path.exists(_resolve(base_dir, p["ratings_file"])):
                errors.append(f"{where}: ratings file {p['ratings_file']!r} not found")
        need = REQUIRED_PARAMS[fam]
        if fam == "mc" and "ratings_file" not in p:
            need = need + ("l", "n", "rank", "density")
        for key in need:
            if key not in params:
                errors.append(f"{where}: missing parameter {key!r}")
        dens = params.get("density")
        if dens is not None and not (isinstance(dens, (int, float)) and 0 < dens <= 1):
            errors.append(f"{where}: density must lie in (0, 1]")

    solvers = doc.get("solvers")
    if not solvers or not isinstance(solvers, list):
        errors.append("at least one solver spec is required")
        solvers = []
    for i, s in enumerate(solvers):
        where = f"solvers[{i}]"
        if isinstance(s, str):
            s = {"method": s}
        if not isinstance(s, dict):
            errors.append(f"{where} must be an object or a method name")
            continue
        if s.get("method") not in METHODS:
            errors.append(f"{where}: method must be one of {METHODS}, got {s.get('method')!r}")
        for key in s.get("config", {}):
            if key not in SOLVER_FIELDS:
                errors.append(f"{where}: unknown solver field {key!r}")
    for key in doc.get("solver_defaults", {}):
        if key not in SOLVER_FIELDS:
            errors.append(f"solver_defaults: unknown solver field {key!r}")
    return errors


def parse_config(doc: dict, base_dir: str = ".", default_name: str = "experiment") -> ExperimentConfig:
    errors = validate_document(doc, base_dir)
    if errors:
        raise ConfigError("; ".join(errors))
    raw_problems = doc.get("problems", [doc.get("problem")])
    problems = []
    for i, p in enumerate(raw_problems):
        fam = p.get("family")
        label = p.get("label") or (f"{fam or 'instance'}-{i}" if len(raw_problems) > 1 else (fam or "instance"))
        problems.append(ProblemSpec(
            family=fam,
            label=label,
            params=dict(p.get("params", {})),
            ratings_file=_resolve(base_dir, p["ratings_file"]) if "ratings_file" in p else None,
            instance_file=_resolve(base_dir, p["instance_file"]) if "instance_file" in p else None,
        ))
    solvers, seen = [], set()
    for s in doc["solvers"]:
        if isinstance(s, str):
            s = {"method": s}
        label = s.get("label", s["method"])
        if label in seen:
            raise ConfigError(f"duplicate solver label {label!r}")
        seen.add(label)
        solvers.append(SolverSpec(s["method"], label, dict(s.get("config", {})), s.get("M_const")))
    return ExperimentConfig(
        name=doc.get("name", default_name),
        seed=int(doc.get("seed", 0)),
        output_dir=_resolve(base_dir, doc.get("output_dir", "results")),
        problems=problems,
        solvers=solvers,
        solver_defaults=dict(doc.get("solver_defaults", {})),
        trace_stride=int(doc.get("trace_stride", 1)),
        include_timings=bool(doc.get("include_timings", False)),
        figures=bool(doc.get("figures", False)),
        base_dir=base_dir,
    )


def read_document(path: str | os.PathLike) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    doc = read_document(path)
    return parse_config(doc, os.path.dirname(os.path.abspath(path)), Path(path).stem)
