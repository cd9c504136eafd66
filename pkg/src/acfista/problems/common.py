"""Helpers shared by the problem families."""

from __future__ import annotations

import math

import numpy as np

# Versioned generator: instances must stay byte-stable across releases.
RNG_NAME = "numpy.random.PCG64"
# Relative slack when testing membership of indicator domains after projections.
MEMBERSHIP_RTOL = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def ball_indicator(z: np.ndarray, r: float) -> float:
    return 0.0 if np.linalg.norm(z) <= r * (1.0 + MEMBERSHIP_RTOL) else math.inf


def uniform_in_ball(rng: np.random.Generator, n: int, r: float) -> np.ndarray:
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    return direction * r * rng.uniform() ** (1.0 / n)


def sparse_positions(rng: np.random.Generator, total: int, density: float) -> np.ndarray:
    """Sorted flat indices of ``round(density * total)`` distinct positions (at least one)."""
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    count = max(1, int(round(density * total)))
    return np.sort(rng.choice(total, size=count, replace=False))
