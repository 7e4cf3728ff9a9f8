"""Matplotlib rendering for the command line report paths.

Every function writes one file and returns None. The Agg backend is forced
so rendering works without a display, and SVG output is made reproducible:
a fixed hash salt and no embedded creation date, so rerunning a command
rewrites byte-identical figures.
"""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bounds import MseBoundReport
from .density import continue_mle_density, stop_mle_density
from .information import InformationBreakdown
from .montecarlo import SimResult

__all__ = [
    "save_curves_figure",
    "save_breakdown_figure",
    "save_bounds_figure",
    "save_simulation_figure",
]

plt.rcParams["svg.hashsalt"] = "seqinfo"

_SAVE_KWARGS = {"metadata": {"Date": None}}


def _save(fig: "plt.Figure", path: str) -> None:
    try:
        if path.lower().endswith(".svg"):
            fig.savefig(path, **_SAVE_KWARGS)
        else:
            fig.savefig(path)
    finally:
        plt.close(fig)


def save_curves_figure(
    path: str,
    thetas: Sequence[float],
    total: Sequence[float],
    design_info: Sequence[float],
    conditional: Sequence[float],
    uncond_bound: Sequence[float],
) -> None:
    """Information decomposition and MSE bound curves over theta."""
    fig, (ax_info, ax_bound) = plt.subplots(2, 1, figsize=(7.0, 7.5), sharex=True)
    ax_info.plot(thetas, total, label="total", color="black")
    ax_info.plot(thetas, design_info, label="decision", color="tab:red")
    ax_info.plot(thetas, conditional, label="data given decision", color="tab:blue")
    ax_info.set_ylabel("Fisher information")
    ax_info.legend(frameon=False)
    ax_info.grid(True, alpha=0.3)
    ax_bound.plot(thetas, uncond_bound, color="tab:purple")
    ax_bound.set_ylabel("unconditional MSE bound")
    ax_bound.set_xlabel("theta")
    ax_bound.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_breakdown_figure(path: str, breakdown: InformationBreakdown) -> None:
    """Bar chart of the information pieces at one theta."""
    labels = ["decision", "stage 1 | decision", "pooled | decision", "total"]
    values = [
        breakdown.design_information,
        breakdown.conditional_stage1,
        breakdown.conditional_total,
        breakdown.total_information,
    ]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.bar(labels, values, color=["tab:red", "tab:blue", "tab:cyan", "black"])
    ax.set_ylabel("Fisher information")
    ax.set_title(f"theta = {breakdown.theta:g}")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_bounds_figure(path: str, report: MseBoundReport) -> None:
    """Per-decision conditional MSE bounds with the unconditional average."""
    labels = [f"d={row.d}" for row in report.per_decision]
    values = [row.bound for row in report.per_decision]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.bar(labels, values, color="tab:blue")
    ax.axhline(
        report.unconditional_bound,
        color="tab:purple",
        linestyle="--",
        label="unconditional",
    )
    ax.set_ylabel("MSE lower bound")
    ax.set_title(f"theta = {report.theta:g}")
    ax.legend(frameon=False)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_simulation_figure(path: str, result: SimResult) -> None:
    """Per-decision estimate histograms with the analytic density overlaid."""
    rows = result.per_decision
    fig, axes = plt.subplots(
        1, len(rows), figsize=(4.5 * len(rows), 3.8), squeeze=False
    )
    design = result.config.design
    theta = result.config.theta
    for ax, row in zip(axes[0], rows):
        edges = row.histogram_edges
        interior = row.histogram_counts[1:-1]
        widths = [b - a for a, b in zip(edges, edges[1:])]
        total = row.count
        if total:
            heights = [c / (total * w) for c, w in zip(interior, widths)]
            ax.bar(edges[:-1], heights, width=widths, align="edge", alpha=0.5)
        if row.count and not math.isnan(row.analytic_bias):
            xs = [
                edges[0] + (edges[-1] - edges[0]) * i / 200.0 for i in range(201)
            ]
            if row.stop:
                ys = [stop_mle_density(design, theta, x, row.d) for x in xs]
            else:
                ys = [continue_mle_density(design, theta, x, row.d) for x in xs]
            ax.plot(xs, ys, color="black", linewidth=1.2)
        kind = "stop" if row.stop else "continue"
        ax.set_title(f"d={row.d} ({kind}), n={row.count}")
        ax.set_xlabel("estimate")
    axes[0][0].set_ylabel("density")
    fig.tight_layout()
    _save(fig, path)
