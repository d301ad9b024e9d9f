"""Confusion counts and precision/recall sweeps over a threshold grid.

A score equal to the threshold counts as a positive prediction (>=
comparison). Degenerate ratios (empty denominator) are defined as 1.0; at
such thresholds recall is 0, so the convention never affects range
extraction, it only keeps curves plottable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LabeledScore:
    """A foodness score paired with its ground-truth class."""

    score: float
    is_food: bool

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts are integers in counting mode, class-weight fractions in
    analytic mode."""

    tp: float
    fp: float
    fn: float
    tn: float

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float
    counts: ConfusionCounts


def make_grid(step: float) -> list[float]:
    """Thresholds {0, step, 2*step, ...} up to and including 1.0."""
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step {step} outside (0, 1]")
    grid = []
    i = 0
    while True:
        value = round(i * step, 10)
        if value >= 1.0:
            break
        grid.append(value)
        i += 1
    grid.append(1.0)
    return grid


def confusion_at(scores: list[LabeledScore], threshold: float) -> ConfusionCounts:
    """Count the four confusion cells at one threshold (predicted positive
    means score >= threshold)."""
    tp = fp = fn = tn = 0
    for item in scores:
        positive = item.score >= threshold
        if item.is_food:
            if positive:
                tp += 1
            else:
                fn += 1
        else:
            if positive:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def pr_from_counts(counts: ConfusionCounts) -> tuple[float, float]:
    predicted = counts.tp + counts.fp
    actual = counts.tp + counts.fn
    precision = counts.tp / predicted if predicted > 0 else 1.0
    recall = counts.tp / actual if actual > 0 else 1.0
    return precision, recall


def sweep_pr(scores: list[LabeledScore], grid_step: float) -> list[PRPoint]:
    """One PRPoint per grid threshold, ascending.

    Vectorized over sorted class pools; pointwise identical to calling
    confusion_at at every grid value.
    """
    grid = np.asarray(make_grid(grid_step))
    food = np.sort(np.array([s.score for s in scores if s.is_food], dtype=float))
    nonfood = np.sort(np.array([s.score for s in scores if not s.is_food], dtype=float))

    # searchsorted(side="left") counts scores strictly below t, so the
    # remainder is the >= t prediction set, matching the tie rule.
    tp = food.size - np.searchsorted(food, grid, side="left")
    fp = nonfood.size - np.searchsorted(nonfood, grid, side="left")
    fn = food.size - tp
    tn = nonfood.size - fp

    points = []
    for i, threshold in enumerate(grid):
        counts = ConfusionCounts(
            tp=int(tp[i]), fp=int(fp[i]), fn=int(fn[i]), tn=int(tn[i])
        )
        precision, recall = pr_from_counts(counts)
        points.append(
            PRPoint(threshold=float(threshold), precision=precision, recall=recall, counts=counts)
        )
    return points
