"""Figure rendering: convergence plots and truss design drawings.

Backs the CLI's report outputs. Uses the Agg backend so rendering
works headless; every function writes a file and returns its path.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["convergence_figure", "design_figure"]


def convergence_figure(path, gaps, ylabel="best-so-far gap", title=None):
    """Log-log optimality-gap curves, one per named series.

    ``gaps`` maps a label to a 1-D array of per-iteration gap values.
    Nonpositive entries cannot be drawn on a log axis and are masked.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for label, series in gaps.items():
        series = np.asarray(series, dtype=float)
        k = np.arange(1, series.size + 1)
        mask = series > 0
        if mask.any():
            ax.loglog(k[mask], series[mask], label=label, linewidth=1.4)
        else:
            ax.loglog([], [], label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def design_figure(path, structure, x, x_min):
    """Draw a truss design with line width proportional to sqrt(area).

    Members below the 1.5 * x_min display threshold are omitted, the
    same convention as the SVG export. Fixed nodes are marked with
    filled squares.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (structure.m,):
        raise ValueError("design vector length must match member count")

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    shown = [e for e in range(structure.m) if x[e] >= 1.5 * x_min]
    wmax = max((np.sqrt(x[e]) for e in shown), default=1.0)
    for e in shown:
        i, j = structure.members[e]
        pts = structure.nodes[[i, j]]
        ax.plot(
            pts[:, 0], pts[:, 1], color="black",
            linewidth=5.0 * np.sqrt(x[e]) / wmax, solid_capstyle="round",
        )
    fixed_nodes = sorted({d // 2 for d in structure.fixed_dofs})
    free_nodes = [k for k in range(structure.num_nodes) if k not in set(fixed_nodes)]
    ax.scatter(structure.nodes[free_nodes, 0], structure.nodes[free_nodes, 1],
               s=14, color="#555", zorder=3)
    if fixed_nodes:
        ax.scatter(structure.nodes[fixed_nodes, 0], structure.nodes[fixed_nodes, 1],
                   s=40, color="#c33", marker="s", zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
