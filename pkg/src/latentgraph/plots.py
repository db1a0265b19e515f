"""Figure rendering for the reporting path.

Figures are written next to the delimited outputs so a run directory is
self-contained; nothing here is needed for fitting.
"""

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_METRICS = (
    ("mean_score", "validation log-likelihood", "score_curve.png"),
    ("mean_edges", "estimated edges", "edges_curve.png"),
    ("mean_rank", "estimated rank", "rank_curve.png"),
)


def save_summary_figures(summary_rows: List[dict], outdir) -> List[str]:
    """One curve figure per metric from `CvReport.summary()` rows; returns filenames."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    specs = []
    for row in summary_rows:
        if row["spec"] not in specs:
            specs.append(row["spec"])
    written = []
    for key, label, fname in _METRICS:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for spec in specs:
            rows = [r for r in summary_rows if r["spec"] == spec]
            lams = np.array([r["lam"] for r in rows])
            vals = np.array([r[key] for r in rows])
            order = np.argsort(lams)
            ax.plot(lams[order], vals[order], marker="o", markersize=3, label=spec)
        ax.set_xscale("log")
        ax.set_xlabel(r"penalty level $\lambda$")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(outdir / fname, dpi=150)
        plt.close(fig)
        written.append(fname)
    return written


def save_estimate_figure(matrices: dict, path) -> str:
    """Side-by-side heatmaps of named estimate matrices."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(matrices)
    fig, axes = plt.subplots(1, n, figsize=(3.4 * n, 3.2))
    if n == 1:
        axes = [axes]
    for ax, (name, m) in zip(axes, matrices.items()):
        scale = float(np.max(np.abs(m))) or 1.0
        im = ax.imshow(m, cmap="RdBu_r", vmin=-scale, vmax=scale)
        ax.set_title(name, fontsize=10)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path.name
