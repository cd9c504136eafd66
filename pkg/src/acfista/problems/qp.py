"""Nonconvex QP over the spectraplex.

``f(Z) = -(alpha1/2) ||D P(Z)||^2 + (alpha2/2) ||Q(Z) - b||^2`` where
``P(Z)_i = <P_i, Z>`` and ``Q(Z)_j = <Q_j, Z>``. Each linear map is stored as a
sparse matrix whose rows are the column-major vectorizations of the P_i (Q_j),
so ``P(Z) = Pmat @ vec(Z)`` and the adjoint is ``Pmat.T @ w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..core import CurvatureTriple, ProblemOracle
from ..prox import (
    eig_factor,
    project_psd_frobenius_ball,
    project_psd_unit_sphere,
    project_spectraplex,
)
from .common import MEMBERSHIP_RTOL, make_rng, sparse_positions

POWER_TOL = 1e-8
POWER_MAX_ITER = 5000


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class QpInstance:
    n: int
    b: np.ndarray
    D: np.ndarray
    P_mat: sp.csr_matrix
    Q_mat: sp.csr_matrix
    alpha1: float = 1.0
    alpha2: float = 1.0
    M_target: Optional[float] = None
    m_target: Optional[float] = None
    seed: Optional[int] = None
    density: Optional[float] = None

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("alpha1 and alpha2 must be non-negative")
        if self.P_mat.shape[1] != self.n * self.n or self.Q_mat.shape[1] != self.n * self.n:
            raise ValueError("operator rows must be vectorized n x n matrices")
        if self.P_mat.shape[0] != self.D.size:
            raise ValueError("D needs one entry per P_i")
        if self.Q_mat.shape[0] != self.b.size:
            raise ValueError("b needs one entry per Q_j")

    @property
    def l(self) -> int:
        return self.b.size


def stack_operators(mats) -> sp.csr_matrix:
    """Rows are ``vec(M)`` in column-major order."""
    rows = [sp.csr_matrix(np.asarray(m.todense() if sp.issparse(m) else m).reshape(1, -1, order="F"))
            for m in mats]
    return sp.vstack(rows, format="csr")


def _symmetrize_vec(v: np.ndarray, n: int) -> np.ndarray:
    Z = v.reshape(n, n, order="F")
    return (0.5 * (Z + Z.T)).reshape(-1, order="F")


def power_iteration(
    apply,
    n: int,
    seed: int = 0,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> float:
    """Largest eigenvalue of a PSD operator on symmetric n x n matrices.

    ``apply`` maps a column-major vectorized symmetric matrix to the same space.
    Iterates on symmetric matrices with the Frobenius inner product, which is an
    isometric copy of the n(n+1)/2-dimensional coordinate space.
    """
    rng = make_rng(seed)
    v = _symmetrize_vec(rng.standard_normal(n * n), n)
    v /= np.linalg.norm(v)
    lam_old = 0.0
    for _ in range(max_iter):
        w = _symmetrize_vec(apply(v), n)
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam - lam_old) <= tol * abs(lam):
            return lam
        lam_old = lam
    raise CalibrationError(f"power iteration did not converge in {max_iter} steps")


def qp_calibrate(
    P_mat: sp.csr_matrix,
    D: np.ndarray,
    Q_mat: sp.csr_matrix,
    M_target: float,
    m_target: float,
    n: Optional[int] = None,
) -> tuple[float, float]:
    """Scale the two quadratic terms so the Hessian spectrum lies in [-m_target, M_target]."""
    if n is None:
        n = int(round(math.sqrt(P_mat.shape[1])))
    if Q_mat.nnz == 0 or P_mat.nnz == 0:
        raise ValueError("operators must be nonzero")
    QtQ = lambda v: Q_mat.T @ (Q_mat @ v)
    D2 = np.asarray(D, dtype=np.float64) ** 2
    PtDP = lambda v: P_mat.T @ (D2 * (P_mat @ v))
    lam_q = power_iteration(QtQ, n)
    alpha2 = M_target / lam_q
    if m_target == 0:
        return 0.0, alpha2
    lam_p = power_iteration(PtDP, n, seed=1)
    return m_target / lam_p, alpha2


OMEGA_CHOICES = ("psd_ball", "psd_sphere")


def qp_oracle(inst: QpInstance, omega: str = "psd_ball") -> ProblemOracle:
    """Oracle with h the spectraplex indicator.

    ``omega="psd_ball"`` takes Omega as the PSD matrices with Frobenius norm at
    most one, a convex set containing the spectraplex. ``"psd_sphere"`` uses the
    unit-norm PSD sphere instead; it is not convex and misses most of the
    spectraplex, and AC-FISTA's momentum step stalls on it.
    """
    if omega not in OMEGA_CHOICES:
        raise ValueError(f"omega must be one of {OMEGA_CHOICES}, got {omega!r}")
    n = inst.n
    P, Q, b = inst.P_mat, inst.Q_mat, inst.b
    Pt, Qt = P.T.tocsr(), Q.T.tocsr()
    D2 = inst.D.astype(np.float64) ** 2
    a1, a2 = inst.alpha1, inst.alpha2

    def value_and_gradient(z):
        if z.size != n * n:
            raise ValueError(f"expected {n * n} entries, got {z.size}")
        pz = P @ z
        rq = Q @ z - b
        val = -0.5 * a1 * float(D2 @ (pz * pz)) + 0.5 * a2 * float(rq @ rq)
        grad = -a1 * (Pt @ (D2 * pz)) + a2 * (Qt @ rq)
        return val, grad

    def f_value(z):
        return value_and_gradient(z)[0]

    def f_gradient(z):
        return value_and_gradient(z)[1]

    def h_prox(z, t):
        return project_spectraplex(z.reshape(n, n, order="F")).reshape(-1, order="F")

    def h_value(z):
        Z = z.reshape(n, n, order="F")
        if np.linalg.norm(Z - Z.T) > MEMBERSHIP_RTOL * max(1.0, np.linalg.norm(Z)):
            return math.inf
        w = eig_factor(Z).values
        if abs(w.sum() - 1.0) > 1e-8 or w[-1] < -1e-8:
            return math.inf
        return 0.0

    omega_kernel = project_psd_frobenius_ball if omega == "psd_ball" else project_psd_unit_sphere

    def omega_project(z):
        return omega_kernel(z.reshape(n, n, order="F")).reshape(-1, order="F")

    M = inst.M_target if inst.M_target is not None else float("nan")
    m = inst.m_target if inst.m_target is not None else float("nan")
    if math.isnan(M) or math.isnan(m):
        curvature = _exact_curvature(inst)
    else:
        curvature = CurvatureTriple(m=m, M=M, L=max(M, m))

    return ProblemOracle(
        f_value=f_value,
        f_gradient=f_gradient,
        h_prox=h_prox,
        h_value=h_value,
        omega_project=omega_project,
        curvature=curvature,
        dimension=n * n,
        name="qp",
        shape=(n, n),
        value_and_gradient=value_and_gradient,
    )


def _exact_curvature(inst: QpInstance) -> CurvatureTriple:
    # Bounds from the two PSD parts; used when no calibration targets were recorded.
    D2 = inst.D.astype(np.float64) ** 2
    lam_q = power_iteration(lambda v: inst.Q_mat.T @ (inst.Q_mat @ v), inst.n)
    lam_p = power_iteration(lambda v: inst.P_mat.T @ (D2 * (inst.P_mat @ v)), inst.n, seed=1)
    M, m = inst.alpha2 * lam_q, inst.alpha1 * lam_p
    return CurvatureTriple(m=m, M=M, L=max(M, m))


def _random_symmetric_ops(rng, count: int, n: int, density: float) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for i in range(count):
        flat = sparse_positions(rng, n * n, density)
        r, c = np.divmod(flat, n)
        v = rng.uniform(0.0, 1.0, size=flat.size)
        A = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
        S = (0.5 * (A + A.T)).tocoo()
        rows.append(np.full(S.nnz, i))
        # column-major vec index of (r, c) is c * n + r
        cols.append(S.col * n + S.row)
        vals.append(S.data)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(count, n * n),
    )


def generate_qp(l: int, n: int, density: float, seed: int) -> QpInstance:
    """Uncalibrated operator data (alpha1 = alpha2 = 1)."""
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = make_rng(seed)
    b = rng.uniform(0.0, 1.0, size=l)
    D = rng.integers(1, 1000, size=n, endpoint=True).astype(np.float64)
    P_mat = _random_symmetric_ops(rng, n, n, density)
    Q_mat = _random_symmetric_ops(rng, l, n, density)
    return QpInstance(n=n, b=b, D=D, P_mat=P_mat, Q_mat=Q_mat, seed=seed, density=density)


def calibrated(inst: QpInstance, M_target: float, m_target: float) -> QpInstance:
    a1, a2 = qp_calibrate(inst.P_mat, inst.D, inst.Q_mat, M_target, m_target, inst.n)
    return replace(inst, alpha1=a1, alpha2=a2, M_target=M_target, m_target=m_target)


def qp_initial_point(n: int) -> np.ndarray:
    return (np.eye(n) / n).reshape(-1, order="F")
