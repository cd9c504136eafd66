"""Self-describing JSON container for generated instances.

Layout::

    {"format": "acfista-instance", "version": 1, "family": "svm",
     "rng": "numpy.random.PCG64", "seed": 1, "params": {...}, "data": {...}}

Sparse operators are stored as coordinate triplets; floats go through
``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import json
import os
from typing import Any, Union

import numpy as np
import scipy.sparse as sp

from .common import RNG_NAME
from .mc import McInstance, RatingsData
from .qp import QpInstance
from .quadratic import QuadraticInstance
from .svm import SvmInstance

FORMAT = "acfista-instance"
VERSION = 1

Instance = Union[SvmInstance, QpInstance, McInstance, QuadraticInstance]


class ContainerError(ValueError):
    pass


def _triplets(A: sp.spmatrix) -> dict:
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    return {
        "shape": list(C.shape),
        "row": C.row[order].tolist(),
        "col": C.col[order].tolist(),
        "val": C.data[order].tolist(),
    }


def _from_triplets(d: dict) -> sp.csr_matrix:
    return sp.csr_matrix((d["val"], (d["row"], d["col"])), shape=tuple(d["shape"]))


def _opt_list(a):
    return None if a is None else np.asarray(a).tolist()


def to_container(inst: Instance) -> dict[str, Any]:
    if isinstance(inst, SvmInstance):
        family = "svm"
        seed = inst.seed
        params = {"n": inst.n, "p": inst.p, "density": inst.density, "lambda": inst.lam, "r": inst.r}
        data = {"features": _triplets(inst.features), "labels": inst.labels.tolist(),
                "z_bar": _opt_list(inst.z_bar)}
    elif isinstance(inst, QpInstance):
        family = "qp"
        seed = inst.seed
        params = {"l": inst.l, "n": inst.n, "density": inst.density,
                  "alpha1": inst.alpha1, "alpha2": inst.alpha2,
                  "M_target": inst.M_target, "m_target": inst.m_target}
        data = {"b": inst.b.tolist(), "D": inst.D.tolist(),
                "P": _triplets(inst.P_mat), "Q": _triplets(inst.Q_mat)}
    elif isinstance(inst, McInstance):
        family = "mc"
        seed = inst.seed
        r = inst.ratings
        params = {"l": r.l, "n": r.n, "mu": inst.mu, "beta": inst.beta, "tau": inst.tau_pen,
                  "R": inst.R, "scale_max": inst.scale_max}
        data = {"row": r.rows.tolist(), "col": r.cols.tolist(), "val": r.values.tolist()}
    elif isinstance(inst, QuadraticInstance):
        family = "quadratic"
        seed = None
        params = {"n": inst.dimension, "radius": inst.radius, "omega_radius": inst.omega_radius}
        data = {"H": inst.H.tolist(), "b": inst.b.tolist()}
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return {"format": FORMAT, "version": VERSION, "family": family, "rng": RNG_NAME,
            "seed": seed, "params": params, "data": data}


def from_container(doc: dict[str, Any]) -> Instance:
    if doc.get("format") != FORMAT:
        raise ContainerError("not an acfista instance container")
    if doc.get("version") != VERSION:
        raise ContainerError(f"unsupported container version {doc.get('version')}")
    family, p, d, seed = doc["family"], doc["params"], doc["data"], doc.get("seed")
    if family == "svm":
        z_bar = None if d.get("z_bar") is None else np.asarray(d["z_bar"], dtype=np.float64)
        return SvmInstance(_from_triplets(d["features"]), np.asarray(d["labels"], dtype=np.float64),
                           float(p["lambda"]), float(p["r"]), seed, z_bar, p.get("density"))
    if family == "qp":
        return QpInstance(
            n=int(p["n"]), b=np.asarray(d["b"], dtype=np.float64), D=np.asarray(d["D"], dtype=np.float64),
            P_mat=_from_triplets(d["P"]), Q_mat=_from_triplets(d["Q"]),
            alpha1=float(p["alpha1"]), alpha2=float(p["alpha2"]),
            M_target=p.get("M_target"), m_target=p.get("m_target"),
            seed=seed, density=p.get("density"),
        )
    if family == "mc":
        ratings = RatingsData(int(p["l"]), int(p["n"]), np.asarray(d["row"], dtype=np.int64),
                              np.asarray(d["col"], dtype=np.int64), np.asarray(d["val"], dtype=np.float64))
        return McInstance(ratings, float(p["mu"]), float(p["beta"]), float(p["tau"]), float(p["R"]),
                          p.get("scale_max"), seed)
    if family == "quadratic":
        return QuadraticInstance(np.asarray(d["H"], dtype=np.float64), np.asarray(d["b"], dtype=np.float64),
                                 p.get("radius"), float(p.get("omega_radius", 1e6)))
    raise ContainerError(f"unknown family {family!r}")


def dumps(inst: Instance) -> str:
    return json.dumps(to_container(inst), sort_keys=True, separators=(",", ":"))


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(inst))
        fh.write("\n")


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContainerError(f"{path}: {exc}") from None
    return from_container(doc)
