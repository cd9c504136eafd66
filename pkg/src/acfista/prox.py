"""Proximal and projection kernels.

Matrix kernels take and return 2-d arrays; the problem oracles handle the
flattening to solver points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .core import OracleError, Point, ProblemOracle


@dataclass(frozen=True)
class SpectralFactorization:
    """``left @ diag(values) @ right.T`` with values sorted descending."""

    left: NDArray
    values: NDArray
    right: NDArray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left.shape[0], self.right.shape[0])

    def reconstruct(self, values: NDArray | None = None) -> NDArray:
        vals = self.values if values is None else values
        return (self.left * vals) @ self.right.T


def svd_factor(Z: NDArray) -> SpectralFactorization:
    try:
        U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"SVD failed: {exc}") from exc
    return SpectralFactorization(U, s, Vt.T)


def eig_factor(Z: NDArray) -> SpectralFactorization:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending (may be negative)."""
    try:
        w, Q = np.linalg.eigh(0.5 * (Z + Z.T))
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"eigendecomposition failed: {exc}") from exc
    return SpectralFactorization(Q[:, ::-1], w[::-1], Q[:, ::-1])


def soft_threshold(x: NDArray, lam: float) -> NDArray:
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def composite_resolvent(
    problem: ProblemOracle,
    x_tilde: Point,
    M: float,
    grad_x_tilde: Point | None = None,
) -> Point:
    """Minimizer of the linearized model ``l_f(.; x_tilde) + h + (M/2)||. - x_tilde||^2``."""
    if not M > 0:
        raise ValueError("M must be positive")
    g = problem.f_gradient(x_tilde) if grad_x_tilde is None else grad_x_tilde
    return problem.h_prox(x_tilde - g / M, 1.0 / M)


def project_ball(z: NDArray, r: float) -> NDArray:
    if not r > 0:
        raise ValueError("radius must be positive")
    nz = np.linalg.norm(z)
    if nz <= r:
        return np.array(z, dtype=np.float64, copy=True)
    return (r / nz) * z


def project_simplex(v) -> NDArray:
    """Euclidean projection onto ``{u >= 0, sum(u) = 1}`` by sort and threshold."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_spectraplex(Z: NDArray) -> NDArray:
    """Projection onto PSD matrices of unit trace."""
    fac = eig_factor(Z)
    out = fac.reconstruct(project_simplex(fac.values))
    return 0.5 * (out + out.T)


def project_psd_unit_sphere(Z: NDArray) -> NDArray:
    """Clip negative eigenvalues, then scale to unit Frobenius norm.

    A zero PSD part maps to ``I / sqrt(n)``.
    """
    fac = eig_factor(Z)
    lam = np.maximum(fac.values, 0.0)
    nrm = np.linalg.norm(lam)
    n = Z.shape[0]
    if nrm == 0.0:
        return np.eye(n) / np.sqrt(n)
    out = fac.reconstruct(lam / nrm)
    return 0.5 * (out + out.T)


def project_psd_frobenius_ball(Z: NDArray, r: float = 1.0) -> NDArray:
    """Projection onto ``{Z PSD, ||Z||_F <= r}``: clip eigenvalues, then shrink into the ball."""
    fac = eig_factor(Z)
    lam = np.maximum(fac.values, 0.0)
    nrm = np.linalg.norm(lam)
    if nrm > r:
        lam *= r / nrm
    out = fac.reconstruct(lam)
    return 0.5 * (out + out.T)


def prox_l1_l2ball(sigma, lam: float, R: float) -> NDArray:
    """Minimize ``lam*||u||_1 + 0.5*||u - sigma||^2`` over ``||u|| <= R``, ``u >= 0``.

    With a multiplier ``nu`` on the ball the stationarity condition reads
    ``u = soft(sigma, lam) / (1 + nu)``, so the solution is the soft-thresholded
    vector pulled back onto the ball when it lies outside.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if not R > 0:
        raise ValueError("R must be positive")
    if np.any(sigma < 0):
        raise ValueError("sigma must be entrywise non-negative")
    s = np.maximum(sigma - lam, 0.0)
    ns = np.linalg.norm(s)
    if ns <= R:
        return s
    return s * (R / ns)


def prox_nuclear_ball(Z: NDArray, lam: float, R: float) -> NDArray:
    """Prox of ``lam*||.||_* + indicator(||.||_F <= R)`` through the singular values."""
    fac = svd_factor(Z)
    return fac.reconstruct(prox_l1_l2ball(fac.values, lam, R))
