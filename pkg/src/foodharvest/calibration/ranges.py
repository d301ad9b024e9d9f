"""Acceptable threshold ranges under precision and recall floors."""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import PRPoint


@dataclass(frozen=True)
class AcceptableRange:
    """Contiguous grid interval where precision >= p_min and recall >= r_min.

    When the qualifying grid points form more than one contiguous run, the
    widest run wins (ties break toward the lowest lower bound) and
    multimodal is flagged. empty means no grid threshold qualified.
    """

    food_fraction: float | None
    lower: float | None
    upper: float | None
    empty: bool = False
    multimodal: bool = False

    def as_interval(self) -> str:
        if self.empty:
            return "(empty)"
        return f"[{self.lower:.2f}, {self.upper:.2f}]"


def acceptable_range(
    pr_points: list[PRPoint],
    p_min: float = 0.8,
    r_min: float = 0.8,
    food_fraction: float | None = None,
) -> AcceptableRange:
    """Extract the maximal contiguous qualifying interval from one sweep."""
    qualifying = [p.precision >= p_min and p.recall >= r_min for p in pr_points]

    runs = []  # (start index, end index) inclusive
    start = None
    for i, ok in enumerate(qualifying):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(qualifying) - 1))

    if not runs:
        return AcceptableRange(food_fraction=food_fraction, lower=None, upper=None, empty=True)

    # Widest run; ties break to the earliest start.
    best = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
    return AcceptableRange(
        food_fraction=food_fraction,
        lower=pr_points[best[0]].threshold,
        upper=pr_points[best[1]].threshold,
        empty=False,
        multimodal=len(runs) > 1,
    )


def intersect_ranges(ranges: list[AcceptableRange]) -> AcceptableRange:
    """[max of lowers, min of uppers]; empty when any input is empty or the
    bounds cross."""
    if not ranges:
        raise ValueError("at least one range required")
    if any(r.empty for r in ranges):
        return AcceptableRange(food_fraction=None, lower=None, upper=None, empty=True)
    lower = max(r.lower for r in ranges)
    upper = min(r.upper for r in ranges)
    if lower > upper:
        return AcceptableRange(food_fraction=None, lower=None, upper=None, empty=True)
    return AcceptableRange(food_fraction=None, lower=lower, upper=upper, empty=False)
