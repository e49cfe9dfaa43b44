"""Figure rendering for the CLI report paths (always to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def bound_report_figure(rows, path) -> None:
    """Bound values against strike, one line per (method, sense) pair."""
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for row in rows:
        series.setdefault((row.method, row.sense), []).append((row.strike, row.value))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (method, sense), pts in sorted(series.items()):
        pts.sort()
        ks, vs = zip(*pts)
        style = "--" if sense == "upper" else "-"
        ax.plot(ks, vs, style, marker="o", ms=3, label=f"{method} {sense}")
    ax.set_xlabel("Strike")
    ax.set_ylabel("Price bound")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def vol_study_figure(rows, path) -> None:
    """Implied-vol curves: market dotted, upper dashed, lower solid."""
    ks = np.array([r["strike"] for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4.5))

    def draw(key, style, label):
        vals = np.array([r[key] for r in rows], dtype=float)
        mask = np.isfinite(vals)
        ax.plot(ks[mask], vals[mask], style, label=label)

    draw("upper_bound_vol", "--", "upper bound")
    draw("lower_bound_vol", "-", "lower bound")
    draw("mc_implied_vol", ":", "market")
    ax.set_xlabel("Strike")
    ax.set_ylabel("Implied volatility")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
