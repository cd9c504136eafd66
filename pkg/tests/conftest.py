import numpy as np
import pytest

from acfista.core import CurvatureTriple, ProblemOracle, SolverConfig
from acfista.prox import project_ball, soft_threshold
from acfista.problems import generate_quadratic, quadratic_oracle


def toy_oracle(f, g, *, prox=None, h=None, omega=None, curvature=(1.0, 1.0, 1.0), dim=2, name="toy"):
    """Small oracle from plain callables; h defaults to zero with Omega = R^n."""
    return ProblemOracle(
        f_value=f,
        f_gradient=g,
        h_prox=prox or (lambda z, t: np.array(z, dtype=float)),
        h_value=h or (lambda z: 0.0),
        omega_project=omega or (lambda z: np.array(z, dtype=float)),
        curvature=CurvatureTriple(*curvature),
        dimension=dim,
        name=name,
    )


def half_sq(dim=2):
    return toy_oracle(lambda z: 0.5 * float(z @ z), lambda z: np.array(z, dtype=float), dim=dim)


def ball_oracle(f, g, r, dim, curvature=(1.0, 1.0, 1.0)):
    return toy_oracle(
        f, g,
        prox=lambda z, t: project_ball(z, r),
        h=lambda z: 0.0 if np.linalg.norm(z) <= r * (1 + 1e-12) else np.inf,
        omega=lambda z: project_ball(z, r),
        curvature=curvature,
        dim=dim,
    )


def l1_oracle(weight, dim=2):
    return toy_oracle(
        lambda z: 0.5 * float(z @ z),
        lambda z: np.array(z, dtype=float),
        prox=lambda z, t: soft_threshold(z, weight * t),
        h=lambda z: weight * float(np.abs(z).sum()),
        dim=dim,
    )


def quartic_interval():
    """f(x) = x^4/4 - x^2/2 on [-2, 2]; stationary points -1, 0, 1."""
    return toy_oracle(
        lambda z: float(z[0] ** 4 / 4 - z[0] ** 2 / 2),
        lambda z: np.array([z[0] ** 3 - z[0]]),
        prox=lambda z, t: np.clip(z, -2.0, 2.0),
        h=lambda z: 0.0 if abs(z[0]) <= 2.0 else np.inf,
        omega=lambda z: np.clip(z, -2.0, 2.0),
        curvature=(1.0, 11.0, 11.0),
        dim=1,
    )


@pytest.fixture
def convex_quadratic():
    inst = generate_quadratic(12, seed=5, eig_min=1.0, eig_max=10.0)
    return inst, quadratic_oracle(inst)


def quad_config(oracle, **kw):
    kw.setdefault("M_cap", oracle.curvature.M / 0.9)
    return SolverConfig(**kw)


CRITERIA_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES):
            terminalreporter.write_line(line)
