"""Sigmoid-loss SVM over a Euclidean ball."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..core import CurvatureTriple, ProblemOracle
from ..prox import project_ball
from .common import ball_indicator, make_rng, sparse_positions, uniform_in_ball

# sup |d^2/dt^2 (1 - tanh t)| = 4 sqrt(3) / 9
SIGMOID_CURVATURE = 4.0 * math.sqrt(3.0) / 9.0


@dataclass(frozen=True)
class SvmInstance:
    features: sp.csr_matrix  # p x n, row i is u_i
    labels: np.ndarray
    lam: float
    r: float
    seed: Optional[int] = None
    z_bar: Optional[np.ndarray] = None
    density: Optional[float] = None

    def __post_init__(self):
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if self.features.shape[0] != self.labels.size:
            raise ValueError("one label per feature vector")
        if self.lam < 0 or not self.r > 0:
            raise ValueError("need lam >= 0 and r > 0")

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def p(self) -> int:
        return self.features.shape[0]


def svm_curvature(inst: SvmInstance) -> CurvatureTriple:
    sq_norms = np.asarray(inst.features.multiply(inst.features).sum(axis=1)).ravel()
    c = SIGMOID_CURVATURE * float(sq_norms.mean()) + inst.lam
    return CurvatureTriple(m=c, M=c, L=c)


def svm_oracle(inst: SvmInstance) -> ProblemOracle:
    U = sp.csr_matrix(inst.features)
    Ut = U.T.tocsr()
    labels = inst.labels.astype(np.float64)
    lam, r, p = inst.lam, inst.r, inst.p

    def value_and_gradient(z):
        t = np.tanh(labels * (U @ z))
        val = float(np.mean(1.0 - t)) + 0.5 * lam * float(z @ z)
        grad = -(Ut @ (labels * (1.0 - t * t))) / p + lam * z
        return val, grad

    def f_value(z):
        t = np.tanh(labels * (U @ z))
        return float(np.mean(1.0 - t)) + 0.5 * lam * float(z @ z)

    def f_gradient(z):
        return value_and_gradient(z)[1]

    return ProblemOracle(
        f_value=f_value,
        f_gradient=f_gradient,
        h_prox=lambda z, t: project_ball(z, r),
        h_value=lambda z: ball_indicator(z, r),
        omega_project=lambda z: project_ball(z, r),
        curvature=svm_curvature(inst),
        dimension=inst.n,
        name="svm",
        value_and_gradient=value_and_gradient,
    )


def generate_svm(n: int, p: int, density: float, lam: float, r: float, seed: int) -> SvmInstance:
    """Sparse U[0,1] features, labels from the sign of <z_bar, u_i> for z_bar uniform in the ball."""
    rng = make_rng(seed)
    flat = sparse_positions(rng, n * p, density)
    rows, cols = np.divmod(flat, n)
    vals = rng.uniform(0.0, 1.0, size=flat.size)
    U = sp.csr_matrix((vals, (rows, cols)), shape=(p, n))
    z_bar = uniform_in_ball(rng, n, r)
    labels = np.where(U @ z_bar >= 0.0, 1.0, -1.0)
    return SvmInstance(U, labels, float(lam), float(r), seed, z_bar, density)


def svm_initial_point(inst: SvmInstance, seed: int) -> np.ndarray:
    return uniform_in_ball(make_rng(seed), inst.n, inst.r)
