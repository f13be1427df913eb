"""Figure rendering for report files.

Every figure goes straight to disk (Agg backend, no display) next to the
CSV/JSON it illustrates. PNG output carries no timestamps or software tag so
repeated runs of the same config produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .survival import SurvivalReport

__all__ = ["render_survival_figure", "render_campaign_figure"]

_DPI = 150
_PNG_METADATA = {"Software": None}


def render_survival_figure(report: SurvivalReport, path: str | Path) -> str:
    """Two panels: |A_t| against its prediction and bound, and the decay rates."""
    fig, (ax_amp, ax_rate) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))

    t = report.times
    ax_amp.plot(t, report.amplitude_abs, color="tab:blue", lw=1.6, label=r"measured $|A_t|$")
    if np.any(np.isfinite(report.predicted_abs)):
        ax_amp.plot(
            t,
            report.predicted_abs,
            color="tab:orange",
            lw=1.2,
            ls="--",
            label=r"$\cos(\int \Delta H/\hbar\, dt)$",
        )
    if np.any(np.isfinite(report.mt_bound)):
        ax_amp.plot(
            t,
            report.mt_bound,
            color="tab:green",
            lw=1.0,
            ls=":",
            label=r"MT bound $\cos(t\,\Delta H/\hbar)$",
        )
    ax_amp.set_ylabel(r"$|A_t|$")
    ax_amp.set_ylim(-0.05, 1.05)
    ax_amp.legend(loc="lower left", fontsize=8)
    ax_amp.grid(alpha=0.3)

    if np.any(np.isfinite(report.decay_rate_empirical)):
        ax_rate.plot(
            t, report.decay_rate_empirical, color="tab:blue", lw=1.6, label=r"$w$ empirical"
        )
    ax_rate.plot(
        t, report.decay_rate_closed, color="tab:orange", lw=1.2, ls="--", label=r"$w$ closed form"
    )
    ax_rate.set_xlabel("t")
    ax_rate.set_ylabel(r"$w = \frac{d}{dt}(1-|A_t|^2)$")
    ax_rate.legend(loc="upper left", fontsize=8)
    ax_rate.grid(alpha=0.3)

    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)
    return str(out)


def render_campaign_figure(
    min_slacks: Sequence[float], tol: float, path: str | Path
) -> str:
    """Per-trial minimum bound slack; anything below −tol is a violation."""
    slacks = np.asarray(min_slacks, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(np.arange(slacks.size), slacks, ".", ms=3, color="tab:blue")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.axhline(-tol, color="tab:red", lw=0.8, ls="--", label=f"violation threshold −{tol:g}")
    ax.set_xlabel("trial")
    ax.set_ylabel(r"$\min_t\,(|A_t| - \cos(t\,\Delta H/\hbar))$")
    ax.set_yscale("symlog", linthresh=1e-12)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)
    return str(out)
