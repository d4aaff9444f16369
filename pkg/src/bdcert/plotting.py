"""Static figure rendering for the report path (PNG files next to the CSV)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def render_regime(regime, outdir: Path, prefix: str = "regime") -> list:
    """One figure per limiting characteristic over the final period."""
    plt = _plt()
    panels = [
        ("p0", regime.p0, "limiting probability of the empty system"),
        (f"p_le_{regime.S}", regime.head_mass,
         f"limiting probability of at most {regime.S} in system"),
        ("mean", regime.mean, "limiting mean number in system"),
    ]
    paths = []
    for key, values, title in panels:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(regime.times, values, lw=1.8)
        ax.set_xlabel("t")
        ax.set_ylabel(key)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = outdir / f"{prefix}_{key}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_rate_comparison(ts, computed, published, outdir: Path,
                           name: str = "weighted_rate") -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, computed, lw=1.8, label="certified infimum")
    ax.plot(ts, published, lw=1.4, ls="--", label="published expression")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted contraction rate")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = outdir / f"{name}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_rates(report, outdir: Path, resolution: int = 512) -> Path:
    plt = _plt()
    period = getattr(report.beta_floor, "period", 1.0) or 1.0
    ts = np.linspace(0.0, period, resolution)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, np.asarray(report.beta_floor(ts), dtype=float), lw=1.8,
            label="catastrophe-rate floor")
    if report.weighted is not None:
        ax.plot(ts, np.asarray(report.weighted.contraction(ts), dtype=float),
                lw=1.4, label="weighted contraction rate")
    ax.set_xlabel("t")
    ax.set_ylabel("rate")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = outdir / "contraction_rates.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
