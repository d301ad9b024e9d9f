"""Threshold calibration: PR sweeps over labeled score pools.

Mixes food and non-food score pools at several ratios, sweeps a threshold
grid, and extracts the contiguous threshold interval where precision and
recall both clear their floors. The intersection of the per-ratio intervals
is the deployable threshold range; its midpoint is the deployed default.
"""

from .metrics import (
    ConfusionCounts,
    LabeledScore,
    PRPoint,
    confusion_at,
    make_grid,
    pr_from_counts,
    sweep_pr,
)
from .ranges import AcceptableRange, acceptable_range, intersect_ranges
from .sampling import MixtureSpec, analytic_pr, mean_pr_over_trials, stratified_trials
from .report import (
    CalibrationReport,
    default_threshold,
    load_pool,
    load_report,
    run_calibration,
    write_pool,
)

__all__ = [
    "AcceptableRange",
    "CalibrationReport",
    "ConfusionCounts",
    "LabeledScore",
    "MixtureSpec",
    "PRPoint",
    "acceptable_range",
    "analytic_pr",
    "confusion_at",
    "default_threshold",
    "intersect_ranges",
    "load_pool",
    "load_report",
    "make_grid",
    "mean_pr_over_trials",
    "pr_from_counts",
    "run_calibration",
    "stratified_trials",
    "sweep_pr",
    "write_pool",
]
