import random

import pytest

from foodharvest.calibration import (
    ConfusionCounts,
    LabeledScore,
    confusion_at,
    make_grid,
    pr_from_counts,
    sweep_pr,
)


def oracle_confusion(scores, threshold):
    """Independent per-item count, kept separate from the library path."""
    tp = sum(1 for s in scores if s.is_food and s.score >= threshold)
    fn = sum(1 for s in scores if s.is_food and s.score < threshold)
    fp = sum(1 for s in scores if not s.is_food and s.score >= threshold)
    tn = sum(1 for s in scores if not s.is_food and s.score < threshold)
    return tp, fp, fn, tn


def random_scores(rng, n):
    return [LabeledScore(round(rng.random(), 4), rng.random() < 0.5) for _ in range(n)]


def test_make_grid_default_step():
    grid = make_grid(0.01)
    assert len(grid) == 101
    assert grid[0] == 0.0
    assert grid[-1] == 1.0
    assert grid[57] == 0.57
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_make_grid_rejects_bad_step():
    with pytest.raises(ValueError):
        make_grid(0.0)
    with pytest.raises(ValueError):
        make_grid(1.5)


def test_confusion_separated_pair():
    scores = [LabeledScore(0.9, True), LabeledScore(0.3, False)]
    c = confusion_at(scores, 0.5)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 0, 0, 1)


def test_confusion_threshold_zero_predicts_everything_positive():
    rng = random.Random(11)
    scores = random_scores(rng, 40)
    c = confusion_at(scores, 0.0)
    assert c.fn == 0 and c.tn == 0
    assert c.tp + c.fp == len(scores)


def test_confusion_matches_oracle_on_random_input():
    rng = random.Random(7)
    scores = random_scores(rng, 50)
    for threshold in [i / 10 for i in range(11)]:
        c = confusion_at(scores, threshold)
        assert (c.tp, c.fp, c.fn, c.tn) == oracle_confusion(scores, threshold)


def test_score_bounds_validated():
    with pytest.raises(ValueError):
        LabeledScore(1.2, True)


def test_pr_from_counts_plain_ratio():
    assert pr_from_counts(ConfusionCounts(tp=4, fp=1, fn=1, tn=0)) == (0.8, 0.8)


def test_pr_from_counts_degenerate_precision():
    precision, recall = pr_from_counts(ConfusionCounts(tp=0, fp=0, fn=5, tn=0))
    assert precision == 1.0
    assert recall == 0.0


def test_pr_from_counts_all_degenerate():
    assert pr_from_counts(ConfusionCounts(tp=0, fp=0, fn=0, tn=10)) == (1.0, 1.0)


def test_sweep_separable_scores():
    scores = [LabeledScore(0.9, True)] * 5 + [LabeledScore(0.1, False)] * 5
    points = sweep_pr(scores, 0.01)
    for p in points:
        if 0.1 < p.threshold <= 0.9:
            assert p.precision == 1.0
            assert p.recall == 1.0


def test_sweep_recall_non_increasing():
    rng = random.Random(3)
    scores = random_scores(rng, 120)
    points = sweep_pr(scores, 0.01)
    recalls = [p.recall for p in points]
    assert all(b <= a for a, b in zip(recalls, recalls[1:]))


def test_sweep_matches_bruteforce_oracle():
    rng = random.Random(42)
    scores = random_scores(rng, 200)
    points = sweep_pr(scores, 0.01)
    assert len(points) == 101
    for p in points:
        assert (p.counts.tp, p.counts.fp, p.counts.fn, p.counts.tn) == oracle_confusion(
            scores, p.threshold
        )


def test_sweep_tie_scores_count_as_kept():
    # A score sitting exactly on a grid threshold is predicted positive.
    scores = [LabeledScore(0.57, True), LabeledScore(0.57, False)]
    points = sweep_pr(scores, 0.01)
    at = {p.threshold: p for p in points}
    assert at[0.57].counts.tp == 1
    assert at[0.57].counts.fp == 1
    assert at[0.58].counts.tp == 0
