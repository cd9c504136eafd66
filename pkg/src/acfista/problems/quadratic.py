"""Quadratic test family ``f(z) = 0.5 z'Hz - b'z`` with optional ball constraint.

Not one of the benchmark families; it has closed-form minimizers and exact
curvature, which makes it the reference problem for solver tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import CurvatureTriple, ProblemOracle
from ..prox import project_ball
from .common import ball_indicator, make_rng


@dataclass(frozen=True)
class QuadraticInstance:
    H: np.ndarray
    b: np.ndarray
    radius: Optional[float] = None
    omega_radius: float = 1e6

    @property
    def dimension(self) -> int:
        return self.b.size

    def minimizer(self) -> np.ndarray:
        """Unconstrained minimizer; only meaningful when H is positive definite."""
        return np.linalg.solve(self.H, self.b)


def quadratic_curvature(H: np.ndarray) -> CurvatureTriple:
    w = np.linalg.eigvalsh(0.5 * (H + H.T))
    M = max(float(w[-1]), 0.0)
    m = max(float(-w[0]), 0.0)
    return CurvatureTriple(m=m, M=M, L=max(M, m))


def quadratic_oracle(inst: QuadraticInstance) -> ProblemOracle:
    H, b, r = inst.H, inst.b, inst.radius

    def f_value(z):
        return float(0.5 * z @ (H @ z) - b @ z)

    def f_gradient(z):
        return H @ z - b

    def value_and_gradient(z):
        Hz = H @ z
        return float(0.5 * z @ Hz - b @ z), Hz - b

    if r is None:
        omega_r = inst.omega_radius

        def h_prox(z, t):
            return np.array(z, dtype=np.float64, copy=True)

        def h_value(z):
            return 0.0

    else:
        omega_r = r

        def h_prox(z, t):
            return project_ball(z, r)

        def h_value(z):
            return ball_indicator(z, r)

    return ProblemOracle(
        f_value=f_value,
        f_gradient=f_gradient,
        h_prox=h_prox,
        h_value=h_value,
        omega_project=lambda z: project_ball(z, omega_r),
        curvature=quadratic_curvature(H),
        dimension=b.size,
        name="quadratic",
        value_and_gradient=value_and_gradient,
    )


def generate_quadratic(
    n: int,
    seed: int,
    eig_min: float = 1.0,
    eig_max: float = 10.0,
    radius: Optional[float] = None,
) -> QuadraticInstance:
    """Random rotation of a diagonal spectrum spread over ``[eig_min, eig_max]``."""
    rng = make_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.linspace(eig_min, eig_max, n)
    H = (Q * w) @ Q.T
    H = 0.5 * (H + H.T)
    b = rng.standard_normal(n)
    return QuadraticInstance(H=H, b=b, radius=radius)
