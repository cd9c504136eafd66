"""Convergence figures written next to the CSV outputs."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..diagnostics import theta_tau_series  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "figure.dpi": 110,
}
# PNG metadata otherwise carries the matplotlib version string.
_PNG_META = {"Software": None}


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def render_problem_figures(outcome, out_dir: str) -> list[str]:
    """Residual, curvature and ratio plots for every solver on one problem."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for run in outcome.runs:
            recs = [r for r in run.result.trace if not r.restarted]
            scale = run.result.grad_z0_norm + 1.0 if run.config.termination_mode == "relative" else 1.0
            ax.semilogy([r.k for r in recs], [max(r.v_norm / scale, 1e-300) for r in recs], label=run.spec.label)
        ax.axhline(outcome.runs[0].config.rho_hat, color="k", ls=":", lw=0.8)
        ax.set_xlabel("iteration k")
        ax.set_ylabel("residual")
        ax.set_title(outcome.problem.label)
        ax.legend()
        paths.append(os.path.join(out_dir, "residual.png"))
        _save(fig, paths[-1])

        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for run in outcome.runs:
            M = np.asarray(run.result.ledger.M_values)
            ax.semilogy(np.arange(M.size), M, label=run.spec.label)
        ax.axhline(outcome.problem.oracle.curvature.M, color="k", ls=":", lw=0.8, label="M (bound)")
        ax.set_xlabel("iteration k")
        ax.set_ylabel("curvature estimate M_k")
        ax.legend()
        paths.append(os.path.join(out_dir, "curvature.png"))
        _save(fig, paths[-1])

        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2), sharex=True)
        for run in outcome.runs:
            if len(run.result.ledger) < 2:
                continue
            theta, tau = theta_tau_series(run.result.ledger)
            k = np.arange(1, theta.size + 1)
            ax1.plot(k, theta, label=run.spec.label)
            ax2.plot(k, tau, label=run.spec.label)
        ax1.set_ylabel("theta_k")
        ax2.set_ylabel("tau_k")
        ax1.set_yscale("log")
        for ax in (ax1, ax2):
            ax.set_xlabel("iteration k")
        ax2.legend()
        paths.append(os.path.join(out_dir, "ratios.png"))
        _save(fig, paths[-1])
    return paths
