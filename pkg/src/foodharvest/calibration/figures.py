"""Render calibration curves to image files next to the delimited report."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import CalibrationReport


def render_pr_curves(report: CalibrationReport, out_path: Path | str) -> Path:
    """One precision/recall curve per mixture ratio, with the floor lines."""
    out_path = Path(out_path)
    p_min = report.params.get("p_min", 0.8)
    r_min = report.params.get("r_min", 0.8)

    fig, ax = plt.subplots(figsize=(6, 5))
    for key in sorted(report.curves, key=float):
        points = report.curves[key]
        ax.plot(
            [p.recall for p in points],
            [p.precision for p in points],
            label=f"{float(key):.0%} food",
        )
    ax.axhline(p_min, color="gray", linestyle="--", linewidth=0.8)
    ax.axvline(r_min, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_title("Foodness filter PR curves by mixture ratio")
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_threshold_bands(report: CalibrationReport, out_path: Path | str) -> Path:
    """Acceptable threshold interval per mixture ratio plus the intersection."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    keys = sorted(report.ranges, key=float)
    for row, key in enumerate(keys):
        r = report.ranges[key]
        if not r.empty:
            ax.plot([r.lower, r.upper], [row, row], linewidth=6, solid_capstyle="butt")
    inter = report.intersection
    if not inter.empty:
        ax.axvspan(inter.lower, inter.upper, color="green", alpha=0.15,
                   label=f"intersection {inter.as_interval()}")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_yticks(range(len(keys)), [f"{float(k):.0%}" for k in keys])
    ax.set_xlim(0, 1)
    ax.set_xlabel("Foodness threshold")
    ax.set_ylabel("Food fraction")
    ax.set_title("Acceptable threshold ranges")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
