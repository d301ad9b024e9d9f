"""Calibration runs and their on-disk report (JSON + CSV of PR points)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .metrics import ConfusionCounts, PRPoint
from .ranges import AcceptableRange, acceptable_range, intersect_ranges
from .sampling import MixtureSpec, analytic_pr, mean_pr_over_trials, stratified_trials


def load_pool(path: Path | str, expect_is_food: bool | None = None) -> list[float]:
    """Read a JSON Lines score pool ({"score", "is_food"} per line)."""
    scores = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            score = float(raw["score"])
            if not 0.0 <= score <= 1.0:
                raise ConfigError(f"{path}:{lineno}: score {score} outside [0, 1]")
            if expect_is_food is not None and bool(raw["is_food"]) != expect_is_food:
                raise ConfigError(
                    f"{path}:{lineno}: is_food={raw['is_food']} in a pool expected "
                    f"to be all is_food={expect_is_food}"
                )
            scores.append(score)
    if not scores:
        raise ConfigError(f"score pool {path} is empty")
    return scores


def write_pool(path: Path | str, scores: list[float], is_food: bool) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for score in scores:
            fh.write(json.dumps({"score": score, "is_food": is_food}) + "\n")


@dataclass
class CalibrationReport:
    params: dict
    curves: dict[str, list[PRPoint]]
    ranges: dict[str, AcceptableRange]
    intersection: AcceptableRange
    default_threshold: float | None

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "curves": {
                key: [
                    {
                        "threshold": p.threshold,
                        "precision": p.precision,
                        "recall": p.recall,
                        "tp": p.counts.tp,
                        "fp": p.counts.fp,
                        "fn": p.counts.fn,
                        "tn": p.counts.tn,
                    }
                    for p in points
                ]
                for key, points in self.curves.items()
            },
            "ranges": {key: _range_to_dict(r) for key, r in self.ranges.items()},
            "intersection": _range_to_dict(self.intersection),
            "default_threshold": self.default_threshold,
        }

    def write_json(self, path: Path | str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path: Path | str) -> None:
        """PR points as delimited rows for external plotting."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["food_fraction", "threshold", "precision", "recall", "tp", "fp", "fn", "tn"]
            )
            for key in sorted(self.curves, key=float):
                for p in self.curves[key]:
                    writer.writerow(
                        [
                            key,
                            f"{p.threshold:.2f}",
                            f"{p.precision:.6f}",
                            f"{p.recall:.6f}",
                            _format_count(p.counts.tp),
                            _format_count(p.counts.fp),
                            _format_count(p.counts.fn),
                            _format_count(p.counts.tn),
                        ]
                    )


def _format_count(value: float) -> str:
    return str(value) if isinstance(value, int) else f"{value:.6f}"


def _range_to_dict(r: AcceptableRange) -> dict:
    return {
        "food_fraction": r.food_fraction,
        "lower": r.lower,
        "upper": r.upper,
        "empty": r.empty,
        "multimodal": r.multimodal,
    }


def _range_from_dict(raw: dict) -> AcceptableRange:
    return AcceptableRange(
        food_fraction=raw.get("food_fraction"),
        lower=raw.get("lower"),
        upper=raw.get("upper"),
        empty=bool(raw.get("empty", False)),
        multimodal=bool(raw.get("multimodal", False)),
    )


def load_report(path: Path | str) -> CalibrationReport:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    curves = {
        key: [
            PRPoint(
                threshold=p["threshold"],
                precision=p["precision"],
                recall=p["recall"],
                counts=ConfusionCounts(tp=p["tp"], fp=p["fp"], fn=p["fn"], tn=p["tn"]),
            )
            for p in points
        ]
        for key, points in raw["curves"].items()
    }
    return CalibrationReport(
        params=raw["params"],
        curves=curves,
        ranges={key: _range_from_dict(r) for key, r in raw["ranges"].items()},
        intersection=_range_from_dict(raw["intersection"]),
        default_threshold=raw.get("default_threshold"),
    )


def default_threshold(intersection: AcceptableRange) -> float:
    """Deployed point value: midpoint of the intersected acceptable range."""
    if intersection.empty:
        raise ConfigError("cannot derive a default threshold from an empty intersection")
    return round((intersection.lower + intersection.upper) / 2.0, 10)


def fraction_key(fraction: float) -> str:
    return f"{fraction:g}"


def run_calibration(
    food_pool: list[float],
    nonfood_pool: list[float],
    fractions: list[float],
    grid_step: float = 0.01,
    p_min: float = 0.8,
    r_min: float = 0.8,
    mode: str = "trials",
    trials: int = 1000,
    sample_size: int = 200,
    seed: int = 0,
) -> CalibrationReport:
    """Sweep every mixture ratio and intersect the acceptable ranges."""
    if mode not in ("trials", "analytic"):
        raise ConfigError(f"unknown calibration mode {mode!r}")
    if not fractions:
        raise ConfigError("at least one food fraction required")

    # One independent seed per fraction so trial draws do not repeat.
    seed_rng = np.random.default_rng(seed)
    fraction_seeds = seed_rng.integers(0, 2**63 - 1, size=len(fractions))

    curves: dict[str, list[PRPoint]] = {}
    ranges: dict[str, AcceptableRange] = {}
    for i, fraction in enumerate(fractions):
        if mode == "analytic":
            points = analytic_pr(food_pool, nonfood_pool, fraction, grid_step)
        else:
            spec = MixtureSpec(
                food_fraction=fraction,
                sample_size=sample_size,
                trial_count=trials,
                seed=int(fraction_seeds[i]),
            )
            trial_sets = stratified_trials(food_pool, nonfood_pool, spec)
            points = mean_pr_over_trials(trial_sets, grid_step)
        key = fraction_key(fraction)
        curves[key] = points
        ranges[key] = acceptable_range(points, p_min, r_min, food_fraction=fraction)

    intersection = intersect_ranges([ranges[fraction_key(f)] for f in fractions])
    chosen = None if intersection.empty else default_threshold(intersection)
    return CalibrationReport(
        params={
            "fractions": list(fractions),
            "grid_step": grid_step,
            "p_min": p_min,
            "r_min": r_min,
            "mode": mode,
            "trials": trials,
            "sample_size": sample_size,
            "seed": seed,
            "food_pool_size": len(food_pool),
            "nonfood_pool_size": len(nonfood_pool),
        },
        curves=curves,
        ranges=ranges,
        intersection=intersection,
        default_threshold=chosen,
    )
