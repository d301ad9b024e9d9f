"""Stratified mixture trials and their analytic (reweighted) counterpart.

Trial mode mirrors the evaluation protocol: many stratified samples drawn
from the labeled pools, PR computed per trial, then averaged per threshold.
Analytic mode skips sampling entirely and weights the full pools by the
mixture ratio, which makes the cross-ratio invariants exact and fast to
test: recall depends only on the food pool, so the recall-driven upper
bound is identical across ratios, and precision at a fixed threshold grows
with the food fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PoolTooSmallError
from .metrics import ConfusionCounts, LabeledScore, PRPoint, make_grid, pr_from_counts, sweep_pr


@dataclass(frozen=True)
class MixtureSpec:
    """How to mix food and non-food scores for one evaluated ratio."""

    food_fraction: float
    sample_size: int
    trial_count: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.food_fraction <= 1.0:
            raise ValueError(f"food_fraction {self.food_fraction} outside (0, 1]")
        if self.sample_size < 1:
            raise ValueError("sample_size must be positive")
        if self.trial_count < 1:
            raise ValueError("trial_count must be positive")

    @property
    def food_per_trial(self) -> int:
        # Half-up rounding keeps the stratum size deterministic.
        return math.floor(self.food_fraction * self.sample_size + 0.5)

    @property
    def nonfood_per_trial(self) -> int:
        return self.sample_size - self.food_per_trial


def stratified_trials(
    food_pool: list[float],
    nonfood_pool: list[float],
    spec: MixtureSpec,
) -> list[list[LabeledScore]]:
    """Draw trial_count stratified samples, without replacement within a
    trial, pools reused across trials. Identical seed, identical trials."""
    n_food = spec.food_per_trial
    n_nonfood = spec.nonfood_per_trial
    if n_food > len(food_pool):
        raise PoolTooSmallError(
            f"food pool has {len(food_pool)} scores, trial needs {n_food}"
        )
    if n_nonfood > len(nonfood_pool):
        raise PoolTooSmallError(
            f"non-food pool has {len(nonfood_pool)} scores, trial needs {n_nonfood}"
        )

    rng = np.random.default_rng(spec.seed)
    food = np.asarray(food_pool, dtype=float)
    nonfood = np.asarray(nonfood_pool, dtype=float)
    trials = []
    for _ in range(spec.trial_count):
        picked_food = food[rng.choice(food.size, size=n_food, replace=False)]
        picked_nonfood = nonfood[rng.choice(nonfood.size, size=n_nonfood, replace=False)]
        trial = [LabeledScore(float(s), True) for s in picked_food]
        trial += [LabeledScore(float(s), False) for s in picked_nonfood]
        trials.append(trial)
    return trials


def mean_pr_over_trials(
    trials: list[list[LabeledScore]], grid_step: float
) -> list[PRPoint]:
    """Arithmetic mean of per-trial precision and recall at each grid
    threshold; the counts field carries the summed confusion counts.

    Summation runs in trial-list order so the result is independent of how
    the per-trial sweeps were scheduled.
    """
    if not trials:
        raise ValueError("at least one trial required")
    grid = make_grid(grid_step)
    precision_sum = np.zeros(len(grid))
    recall_sum = np.zeros(len(grid))
    count_sum = np.zeros((len(grid), 4))
    for trial in trials:
        for i, point in enumerate(sweep_pr(trial, grid_step)):
            precision_sum[i] += point.precision
            recall_sum[i] += point.recall
            c = point.counts
            count_sum[i] += (c.tp, c.fp, c.fn, c.tn)

    n = len(trials)
    points = []
    for i, threshold in enumerate(grid):
        counts = ConfusionCounts(*(int(v) for v in count_sum[i]))
        points.append(
            PRPoint(
                threshold=threshold,
                precision=precision_sum[i] / n,
                recall=recall_sum[i] / n,
                counts=counts,
            )
        )
    return points


def analytic_pr(
    food_pool: list[float],
    nonfood_pool: list[float],
    food_fraction: float,
    grid_step: float,
) -> list[PRPoint]:
    """Deterministic reweighting mode over the full pools.

    Confusion cells are class-weight fractions: the food pool's survival
    fraction at t weighted by food_fraction, the non-food pool's by its
    complement. The four cells sum to 1.
    """
    if not food_pool or not nonfood_pool:
        raise ValueError("analytic mode needs non-empty pools")
    if not 0.0 < food_fraction <= 1.0:
        raise ValueError(f"food_fraction {food_fraction} outside (0, 1]")

    grid = np.asarray(make_grid(grid_step))
    food = np.sort(np.asarray(food_pool, dtype=float))
    nonfood = np.sort(np.asarray(nonfood_pool, dtype=float))
    food_alive = (food.size - np.searchsorted(food, grid, side="left")) / food.size
    nonfood_alive = (nonfood.size - np.searchsorted(nonfood, grid, side="left")) / nonfood.size

    w_food = food_fraction
    w_nonfood = 1.0 - food_fraction
    points = []
    for i, threshold in enumerate(grid):
        counts = ConfusionCounts(
            tp=w_food * food_alive[i],
            fp=w_nonfood * nonfood_alive[i],
            fn=w_food * (1.0 - food_alive[i]),
            tn=w_nonfood * (1.0 - nonfood_alive[i]),
        )
        precision, recall = pr_from_counts(counts)
        points.append(
            PRPoint(threshold=float(threshold), precision=precision, recall=recall, counts=counts)
        )
    return points
