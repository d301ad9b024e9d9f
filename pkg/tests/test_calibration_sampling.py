import random

import pytest

from foodharvest.calibration import (
    MixtureSpec,
    analytic_pr,
    mean_pr_over_trials,
    stratified_trials,
    sweep_pr,
)
from foodharvest.errors import PoolTooSmallError


def make_pools(rng, n_food=300, n_nonfood=300):
    food = [min(1.0, max(0.0, rng.gauss(0.8, 0.12))) for _ in range(n_food)]
    nonfood = [min(1.0, max(0.0, rng.gauss(0.25, 0.12))) for _ in range(n_nonfood)]
    return food, nonfood


def test_trials_have_exact_strata():
    food, nonfood = make_pools(random.Random(1))
    spec = MixtureSpec(food_fraction=0.5, sample_size=100, trial_count=20, seed=9)
    for trial in stratified_trials(food, nonfood, spec):
        assert sum(1 for s in trial if s.is_food) == 50
        assert sum(1 for s in trial if not s.is_food) == 50


def test_trial_count_supports_protocol_scale():
    food, nonfood = make_pools(random.Random(2))
    spec = MixtureSpec(food_fraction=0.7, sample_size=40, trial_count=1000, seed=5)
    trials = stratified_trials(food, nonfood, spec)
    assert len(trials) == 1000
    assert all(sum(1 for s in t if s.is_food) == 28 for t in trials)


def test_same_seed_identical_trials():
    food, nonfood = make_pools(random.Random(3))
    spec = MixtureSpec(food_fraction=0.6, sample_size=60, trial_count=15, seed=123)
    first = stratified_trials(food, nonfood, spec)
    second = stratified_trials(food, nonfood, spec)
    assert first == second


def test_no_replacement_within_trial():
    food = [i / 100 for i in range(100)]
    nonfood = [i / 200 for i in range(100)]
    spec = MixtureSpec(food_fraction=0.5, sample_size=200, trial_count=3, seed=0)
    for trial in stratified_trials(food, nonfood, spec):
        picked_food = sorted(s.score for s in trial if s.is_food)
        assert picked_food == sorted(set(picked_food))


def test_pool_too_small():
    with pytest.raises(PoolTooSmallError):
        stratified_trials(
            [0.9] * 10,
            [0.1] * 100,
            MixtureSpec(food_fraction=0.5, sample_size=100, trial_count=1, seed=0),
        )


def test_mean_of_single_trial_equals_its_sweep():
    food, nonfood = make_pools(random.Random(4), 80, 80)
    spec = MixtureSpec(food_fraction=0.5, sample_size=40, trial_count=1, seed=2)
    (trial,) = stratified_trials(food, nonfood, spec)
    mean_points = mean_pr_over_trials([trial], 0.01)
    direct = sweep_pr(trial, 0.01)
    for m, d in zip(mean_points, direct):
        assert m.threshold == d.threshold
        assert m.precision == pytest.approx(d.precision, abs=1e-12)
        assert m.recall == pytest.approx(d.recall, abs=1e-12)


def test_mean_of_identical_trials_is_idempotent():
    food, nonfood = make_pools(random.Random(5), 80, 80)
    spec = MixtureSpec(food_fraction=0.5, sample_size=40, trial_count=1, seed=8)
    (trial,) = stratified_trials(food, nonfood, spec)
    doubled = mean_pr_over_trials([trial, trial], 0.01)
    single = sweep_pr(trial, 0.01)
    for m, d in zip(doubled, single):
        assert m.precision == pytest.approx(d.precision, abs=1e-12)
        assert m.recall == pytest.approx(d.recall, abs=1e-12)
        assert m.counts.tp == 2 * d.counts.tp


def test_mean_matches_recompute_oracle():
    food, nonfood = make_pools(random.Random(6))
    spec = MixtureSpec(food_fraction=0.6, sample_size=50, trial_count=10, seed=77)
    trials = stratified_trials(food, nonfood, spec)
    mean_points = mean_pr_over_trials(trials, 0.1)

    # Oracle: recompute every per-trial curve and average by hand.
    per_trial = [sweep_pr(t, 0.1) for t in trials]
    for i, point in enumerate(mean_points):
        expected_p = sum(curve[i].precision for curve in per_trial) / len(trials)
        expected_r = sum(curve[i].recall for curve in per_trial) / len(trials)
        assert point.precision == pytest.approx(expected_p, abs=1e-12)
        assert point.recall == pytest.approx(expected_r, abs=1e-12)


def test_analytic_recall_ignores_food_fraction():
    food, nonfood = make_pools(random.Random(8))
    low = analytic_pr(food, nonfood, 0.5, 0.01)
    high = analytic_pr(food, nonfood, 0.9, 0.01)
    for a, b in zip(low, high):
        assert a.recall == pytest.approx(b.recall, abs=1e-12)


def test_analytic_separable_precision():
    food = [0.8, 0.85, 0.9]
    nonfood = [0.1, 0.2, 0.3]
    points = analytic_pr(food, nonfood, 0.5, 0.01)
    for p in points:
        if 0.3 < p.threshold <= 0.8:
            assert p.precision == 1.0


def test_analytic_precision_non_decreasing_in_fraction():
    food, nonfood = make_pools(random.Random(9))
    fractions = [0.5, 0.6, 0.7, 0.8, 0.9]
    curves = [analytic_pr(food, nonfood, f, 0.05) for f in fractions]
    for i in range(len(curves[0])):
        precisions = [curve[i].precision for curve in curves]
        assert all(b >= a - 1e-12 for a, b in zip(precisions, precisions[1:]))

    # Spot-check one threshold against the direct weighted formula.
    t = 0.5
    alive_food = sum(1 for s in food if s >= t) / len(food)
    alive_nonfood = sum(1 for s in nonfood if s >= t) / len(nonfood)
    for fraction, curve in zip(fractions, curves):
        point = next(p for p in curve if p.threshold == t)
        expected = (fraction * alive_food) / (
            fraction * alive_food + (1 - fraction) * alive_nonfood
        )
        assert point.precision == pytest.approx(expected, abs=1e-12)


def test_analytic_counts_sum_to_one():
    food, nonfood = make_pools(random.Random(10), 50, 70)
    for p in analytic_pr(food, nonfood, 0.7, 0.2):
        assert p.counts.total == pytest.approx(1.0, abs=1e-12)
