"""Log-sum-penalty matrix completion over a Frobenius ball.

The penalty ``mu * sum p(sigma_i(Z))`` with ``p(t) = beta log(1 + t/tau)`` is
split as a smooth concave-corrected part ``mu * sum [p(sigma_i) - p0 sigma_i]``
kept in f and the convex part ``mu p0 ||Z||_*`` moved into h, with
``p0 = p'(0) = beta / tau``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import CurvatureTriple, ProblemOracle
from ..prox import project_ball, prox_nuclear_ball, svd_factor
from .common import MEMBERSHIP_RTOL, make_rng, sparse_positions


class RatingsParseError(ValueError):
    pass


@dataclass(frozen=True)
class RatingsData:
    """Observed entries with 0-based row/column indices."""

    l: int
    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def count(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class McInstance:
    ratings: RatingsData
    mu: float
    beta: float
    tau_pen: float
    R: float
    scale_max: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0 and self.tau_pen > 0):
            raise ValueError("mu, beta and tau_pen must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")
        r = self.ratings
        if r.count and (r.rows.min() < 0 or r.rows.max() >= r.l or r.cols.min() < 0 or r.cols.max() >= r.n):
            raise ValueError("observed index out of range")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ratings.l, self.ratings.n)

    @property
    def p0(self) -> float:
        return self.beta / self.tau_pen

    @property
    def kappa(self) -> float:
        return self.beta / self.tau_pen**2


def mc_curvature(mu: float, beta: float, tau_pen: float) -> CurvatureTriple:
    kappa = beta / tau_pen**2
    m = 2.0 * mu * kappa
    return CurvatureTriple(m=m, M=1.0, L=max(1.0, m))


def mc_oracle(inst: McInstance) -> ProblemOracle:
    l, n = inst.shape
    rows, cols, obs = inst.ratings.rows, inst.ratings.cols, inst.ratings.values
    mu, beta, tau, p0, R = inst.mu, inst.beta, inst.tau_pen, inst.p0, inst.R

    def _mat(z):
        if z.size != l * n:
            raise ValueError(f"expected {l * n} entries, got {z.size}")
        return z.reshape(l, n, order="F")

    def _fit(Z):
        res = Z[rows, cols] - obs
        return res, 0.5 * float(res @ res)

    def _spectral(s):
        return mu * float(np.sum(beta * np.log1p(s / tau) - p0 * s))

    def f_value(z):
        Z = _mat(z)
        _, fit = _fit(Z)
        s = np.linalg.svd(Z, compute_uv=False)
        return fit + _spectral(s)

    def value_and_gradient(z):
        Z = _mat(z)
        res, fit = _fit(Z)
        fac = svd_factor(Z)
        s = fac.values
        G = fac.reconstruct(mu * (beta / (tau + s) - p0))
        G[rows, cols] += res
        return fit + _spectral(s), G.reshape(-1, order="F")

    def f_gradient(z):
        return value_and_gradient(z)[1]

    def h_prox(z, t):
        return prox_nuclear_ball(_mat(z), mu * p0 * t, R).reshape(-1, order="F")

    def h_value(z):
        Z = _mat(z)
        if np.linalg.norm(Z) > R * (1.0 + MEMBERSHIP_RTOL):
            return math.inf
        return mu * p0 * float(np.sum(np.linalg.svd(Z, compute_uv=False)))

    return ProblemOracle(
        f_value=f_value,
        f_gradient=f_gradient,
        h_prox=h_prox,
        h_value=h_value,
        omega_project=lambda z: project_ball(z, R),
        curvature=mc_curvature(mu, beta, tau),
        dimension=l * n,
        name="mc",
        shape=(l, n),
        value_and_gradient=value_and_gradient,
    )


def mc_radius(ratings: RatingsData, scale_max: float) -> float:
    """Frobenius norm of the matrix holding the observations and ``scale_max`` elsewhere."""
    if not scale_max > 0:
        raise ValueError("scale_max must be positive")
    unobserved = ratings.l * ratings.n - ratings.count
    return math.sqrt(float(ratings.values @ ratings.values) + unobserved * scale_max**2)


def load_ratings(path: str | os.PathLike) -> RatingsData:
    """Parse ``user item rating [timestamp]`` lines with 1-based ids.

    Fields may be separated by tabs or spaces. Dimensions are the largest ids
    seen; a repeated (user, item) pair keeps its last rating.
    """
    entries: dict[tuple[int, int], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) not in (3, 4):
                raise RatingsParseError(f"{path}:{lineno}: expected 3 or 4 fields, got {len(parts)}")
            try:
                user, item = int(parts[0]), int(parts[1])
                rating = float(parts[2])
            except ValueError as exc:
                raise RatingsParseError(f"{path}:{lineno}: {exc}") from None
            if user < 1 or item < 1:
                raise RatingsParseError(f"{path}:{lineno}: ids must be positive")
            if not math.isfinite(rating):
                raise RatingsParseError(f"{path}:{lineno}: non-finite rating")
            entries.pop((user, item), None)
            entries[(user, item)] = rating
    if not entries:
        raise RatingsParseError(f"{path}: no ratings found")
    keys = np.array(list(entries.keys()), dtype=np.int64)
    vals = np.array(list(entries.values()), dtype=np.float64)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    keys, vals = keys[order], vals[order]
    return RatingsData(
        l=int(keys[:, 0].max()),
        n=int(keys[:, 1].max()),
        rows=keys[:, 0] - 1,
        cols=keys[:, 1] - 1,
        values=vals,
    )


def generate_mc(
    l: int,
    n: int,
    rank: int,
    density: float,
    scale: tuple[float, float],
    seed: int,
) -> RatingsData:
    """Low-rank ground truth mapped affinely onto ``scale``, observed on a uniform subset."""
    if not 1 <= rank <= min(l, n):
        raise ValueError(f"rank must lie in [1, {min(l, n)}], got {rank}")
    lo, hi = scale
    if not hi > lo:
        raise ValueError("scale must be an increasing pair")
    rng = make_rng(seed)
    X = rng.standard_normal((l, rank)) @ rng.standard_normal((rank, n))
    span = X.max() - X.min()
    X = lo + (hi - lo) * (X - X.min()) / (span if span > 0 else 1.0)
    flat = sparse_positions(rng, l * n, density)
    r, c = np.divmod(flat, n)
    return RatingsData(l=l, n=n, rows=r, cols=c, values=X[r, c])


def mc_instance(
    ratings: RatingsData,
    mu: float,
    beta: float,
    tau_pen: float,
    scale_max: float,
    seed: Optional[int] = None,
) -> McInstance:
    return McInstance(ratings, mu, beta, tau_pen, mc_radius(ratings, scale_max), scale_max, seed)


def mc_initial_point(inst: McInstance, seed: int) -> np.ndarray:
    """Standard Gaussian entries, pulled back into the ball when outside it."""
    l, n = inst.shape
    Z = make_rng(seed).standard_normal((l, n))
    return project_ball(Z.reshape(-1, order="F"), inst.R)
