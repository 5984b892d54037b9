"""Figure rendering for evaluation output.

Draws top-down probability maps over a scan's view positions and a metric
summary chart, written as image files next to the JSON/CSV report. Only
positions and probabilities are drawn; panoramic imagery is never read.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import SampleOutcome
from .metrics import Report
from .world import Scan

__all__ = [
    "plot_view_probabilities",
    "plot_report_summary",
    "render_eval_figures",
]


def plot_view_probabilities(
    scan: Scan,
    candidate_ids: Sequence[str],
    probs: Sequence[float],
    target_id: str,
    guess_id: str,
    path: str | Path,
    title: str | None = None,
) -> Path:
    """Scatter the scan's views in the x-y plane, sized and colored by probability."""
    path = Path(path)
    probs = np.asarray(probs, dtype=float)
    candidate_set = set(candidate_ids)

    fig, ax = plt.subplots(figsize=(7, 6))
    rest = [v for v in scan.views.values() if v.view_id not in candidate_set]
    if rest:
        ax.scatter(
            [v.position[0] for v in rest],
            [v.position[1] for v in rest],
            s=12, c="0.85", zorder=1, label="other views",
        )

    xs = [scan.views[c].position[0] for c in candidate_ids]
    ys = [scan.views[c].position[1] for c in candidate_ids]
    pmax = probs.max() if probs.size else 1.0
    sizes = 20 + 380 * (probs / pmax if pmax > 0 else probs)
    sc = ax.scatter(xs, ys, s=sizes, c=probs, cmap="viridis", zorder=2, label="candidates")
    fig.colorbar(sc, ax=ax, label="probability")

    tx, ty = scan.views[target_id].position[:2]
    ax.scatter([tx], [ty], marker="*", s=320, facecolors="none",
               edgecolors="red", linewidths=1.6, zorder=3, label="target")
    gx, gy = scan.views[guess_id].position[:2]
    ax.scatter([gx], [gy], marker="o", s=260, facecolors="none",
               edgecolors="black", linewidths=1.4, zorder=3, label="guess")

    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(title or f"scan {scan.scan_id}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_report_summary(report: Report, path: str | Path, title: str | None = None) -> Path:
    """Bar chart of the percentage metrics, annotated with MRR and mean error."""
    path = Path(path)
    labels = ["success", "hits@1", "close", "same room"]
    values = [report.success_pct, report.hits_at_1_pct, report.close_pct, report.same_room_pct]

    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(labels, values, color=["#4c72b0", "#dd8452", "#55a868", "#c44e52"])
    ax.bar_label(bars, fmt="%.1f")
    ax.set_ylim(0, 105)
    ax.set_ylabel("%")
    err = "n/a" if report.mean_error_m is None else f"{report.mean_error_m:.2f} m"
    ax.set_title(title or f"n={report.n_samples}  mrr={report.mrr:.3f}  mean error={err}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_eval_figures(
    scans: Mapping[str, Scan],
    report: Report,
    outcomes: Sequence[SampleOutcome],
    out_dir: str | Path,
    max_samples: int = 4,
) -> list[Path]:
    """Render the summary chart plus probability maps for the first samples.

    Only outcomes that retained per-candidate probabilities get a map.
    Returns the written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [plot_report_summary(report, out_dir / "report_summary.png")]
    plotted = 0
    for i, outcome in enumerate(outcomes):
        if plotted >= max_samples:
            break
        if outcome.candidate_ids is None or outcome.probs is None:
            continue
        scan = scans[outcome.scan_id]
        title = (
            f"scan {outcome.scan_id}: target {outcome.target_id}, "
            f"guess {outcome.guess_id} (rank {outcome.rank})"
        )
        written.append(
            plot_view_probabilities(
                scan,
                outcome.candidate_ids,
                outcome.probs,
                outcome.target_id,
                outcome.guess_id,
                out_dir / f"sample_{i:04d}_{outcome.key}.png",
                title=title,
            )
        )
        plotted += 1
    return written
