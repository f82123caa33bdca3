"""Figure rendering for report files.

Each function takes records produced by the evaluation harness and writes
one PNG next to the delimited output.  Rendering is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["save_sweep_figure", "save_contamination_figure", "save_bench_figure"]


def save_sweep_figure(psi_reports, t_reports, path) -> None:
    """AUROC against each swept hyperparameter, one panel per non-empty grid."""
    panels = []
    if psi_reports:
        panels.append(("spheres per partitioning", [(r.psi, r.auroc) for r in psi_reports]))
    if t_reports:
        panels.append(("partitionings", [(r.t, r.auroc) for r in t_reports]))
    fig, axes = plt.subplots(1, len(panels), figsize=(5.0 * len(panels), 3.6), squeeze=False)
    for ax, (label, pts) in zip(axes[0], panels):
        pts = sorted(pts)
        ax.plot([x for x, _ in pts], [a for _, a in pts], marker="o")
        ax.set_xscale("log", base=2)
        ax.set_xlabel(label)
        ax.set_ylabel("AUROC")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_contamination_figure(reports, path) -> None:
    """Mean AUROC against the training contamination ratio."""
    pts = sorted((r.ratio, r.auroc) for r in reports if r.ratio is not None)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot([p for p, _ in pts], [a for _, a in pts], marker="o")
    ax.set_xlabel("training anomaly ratio")
    ax.set_ylabel("AUROC")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(rows, path) -> None:
    """Fit and score times against dataset size, log-log."""
    sizes = [r.size for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for fieldname, label in [
        ("sik_fit_seconds", "boundary fit"),
        ("sik_score_seconds", "boundary score"),
        ("idk_fit_seconds", "distributional fit"),
        ("idk_score_seconds", "distributional score"),
    ]:
        ax.plot(sizes, [getattr(r, fieldname) for r in rows], marker="o", label=label)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("points")
    ax.set_ylabel("seconds")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
