#!/usr/bin/env python3
"""Regenerate the bundled synthetic score pools (fixtures/pools/).

Food scores are drawn high, non-food scores low, so the acceptable-range
pattern across mixture ratios is visible at desk scale: same upper bound
everywhere, lower bound falling as the food fraction rises. The chosen
seed is verified to produce contiguous (single-run) acceptable ranges for
every shipped fraction before anything is written.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from foodharvest.calibration import run_calibration, write_pool

POOL_SIZE = 1000
SEED = 20240501
FRACTIONS = [0.5, 0.6, 0.7, 0.8, 0.9]
OUT_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "pools"


def main() -> int:
    rng = np.random.default_rng(SEED)
    food = np.clip(rng.beta(8.0, 2.2, POOL_SIZE), 0.0, 1.0)
    nonfood = np.clip(rng.beta(2.0, 6.5, POOL_SIZE), 0.0, 1.0)
    food_pool = [round(float(s), 4) for s in food]
    nonfood_pool = [round(float(s), 4) for s in nonfood]

    report = run_calibration(food_pool, nonfood_pool, FRACTIONS, mode="analytic")
    uppers = set()
    lowers = []
    for fraction in FRACTIONS:
        r = report.ranges[f"{fraction:g}"]
        if r.empty or r.multimodal:
            print(f"rejecting seed: fraction {fraction} range empty/multimodal: {r}")
            return 1
        uppers.add(r.upper)
        lowers.append(r.lower)
        print(f"{fraction:.0%}: {r.as_interval()}")
    if len(uppers) != 1:
        print(f"rejecting seed: upper bounds differ: {sorted(uppers)}")
        return 1
    if any(b > a for a, b in zip(lowers, lowers[1:])):
        print(f"rejecting seed: lower bounds not monotone: {lowers}")
        return 1
    print(f"intersection: {report.intersection.as_interval()}")
    print(f"default threshold: {report.default_threshold}")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_pool(OUT_DIR / "food_scores.jsonl", food_pool, is_food=True)
    write_pool(OUT_DIR / "nonfood_scores.jsonl", nonfood_pool, is_food=False)
    print(f"pools written under {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
