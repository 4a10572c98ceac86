"""Activation and hazard (failure-rate) series on age and wall-clock scales.

Counting is per test case: a test case that runs several times on one day
contributes once to the denominator, and once to the hazard numerator if any
of those runs failed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

from .ceo import CeoDataset, Outcome
from .lifespan import LifeSpan

DEFAULT_MIN_SUPPORT = 10
YEAR_DAYS = 365

ACTIVATION = "activation"
HAZARD = "hazard"


@dataclass(frozen=True)
class RatePoint:
    age_days: int
    numerator: int
    denominator: int
    low_support: bool = False

    @property
    def rate(self) -> float:
        return self.numerator / self.denominator if self.denominator else float("nan")


@dataclass(frozen=True)
class RateSeries:
    kind: str
    points: tuple[RatePoint, ...]
    min_support: int = 1
    scale: str = "age"

    def supported(self) -> "RateSeries":
        """The points that smoothing and fitting are allowed to use."""
        return replace(self, points=tuple(p for p in self.points if not p.low_support))

    def ages(self) -> np.ndarray:
        return np.array([p.age_days for p in self.points], dtype=float)

    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)


def apply_min_support(series: RateSeries, min_support: int = DEFAULT_MIN_SUPPORT) -> RateSeries:
    if min_support < 1:
        raise ValueError("min_support must be at least 1")
    points = tuple(replace(p, low_support=p.denominator < min_support) for p in series.points)
    return replace(series, points=points, min_support=min_support)


def daily_outcomes(dataset: CeoDataset) -> dict[str, dict[int, bool]]:
    """Per test case: wall-clock day -> whether any execution that day failed."""
    days: dict[str, dict[int, bool]] = {}
    for ex in dataset.executions:
        per = days.setdefault(ex.test_case, {})
        d = dataset.day_index(ex.execution_time)
        per[d] = per.get(d, False) or ex.outcome is Outcome.FAIL
    return days


def _age_tallies(dataset: CeoDataset, spans: Sequence[LifeSpan]):
    executed: dict[int, int] = {}
    failed: dict[int, int] = {}
    daily = daily_outcomes(dataset)
    for s in spans:
        for day, fail in daily.get(s.test_case, {}).items():
            age = day - s.t0
            executed[age] = executed.get(age, 0) + 1
            if fail:
                failed[age] = failed.get(age, 0) + 1
    return executed, failed


def activation_series(
    dataset: CeoDataset, spans: Sequence[LifeSpan], min_support: int = DEFAULT_MIN_SUPPORT
) -> RateSeries:
    """Share of test cases old enough to have age t that ran at age t.

    One point per age from 0 to the oldest terminal age.
    """
    executed, _ = _age_tallies(dataset, spans)
    if not spans:
        return RateSeries(ACTIVATION, (), min_support)
    max_age = max(s.terminal_age_days for s in spans)
    # at_least[t] = number of test cases with terminal age >= t
    counts = np.bincount([s.terminal_age_days for s in spans], minlength=max_age + 1)
    at_least = np.cumsum(counts[::-1])[::-1]
    points = tuple(
        RatePoint(t, executed.get(t, 0), int(at_least[t])) for t in range(max_age + 1)
    )
    return apply_min_support(RateSeries(ACTIVATION, points), min_support)


def hazard_series(
    dataset: CeoDataset, spans: Sequence[LifeSpan], min_support: int = DEFAULT_MIN_SUPPORT
) -> RateSeries:
    """Share of test cases executing at age t that failed at age t.

    Ages at which nothing ran have no point.
    """
    executed, failed = _age_tallies(dataset, spans)
    points = tuple(RatePoint(t, failed.get(t, 0), executed[t]) for t in sorted(executed))
    return apply_min_support(RateSeries(HAZARD, points), min_support)


def wallclock_series(
    dataset: CeoDataset,
    spans: Sequence[LifeSpan],
    kind: str,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> RateSeries:
    """Activation or hazard series indexed by wall-clock day instead of age.

    The activation denominator is the growth-curve membership for that day.
    """
    daily = daily_outcomes(dataset)
    executed: dict[int, int] = {}
    failed: dict[int, int] = {}
    for s in spans:
        for day, fail in daily.get(s.test_case, {}).items():
            executed[day] = executed.get(day, 0) + 1
            failed[day] = failed.get(day, 0) + int(fail)

    if kind == HAZARD:
        points = tuple(RatePoint(d, failed[d], executed[d]) for d in sorted(executed))
    elif kind == ACTIVATION:
        if not spans:
            return RateSeries(kind, (), min_support, scale="wallclock")
        first = min(s.t0 for s in spans)
        end = max(s.end_day for s in spans)
        members = np.zeros(end - first + 2, dtype=int)
        for s in spans:
            members[s.t0 - first] += 1
            members[s.last_member_day - first + 1] -= 1
        members = np.cumsum(members)
        points = tuple(
            RatePoint(first + i, executed.get(first + i, 0), int(members[i]))
            for i in range(end - first + 1)
            if members[i] > 0
        )
    else:
        raise ValueError(f"unknown series kind {kind!r}")
    return apply_min_support(RateSeries(kind, points, scale="wallclock"), min_support)


def yearly_failure_rates(
    dataset: CeoDataset,
    spans: Sequence[LifeSpan],
    mode: str = "pooled",
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> list[tuple[int, float]]:
    """Average failure rate per year of test case age.

    Year 1 covers ages 0-364, year 2 ages 365-729, and so on. ``pooled``
    divides the failing test-case-days by the executing test-case-days of the
    year; ``mean_of_daily`` averages the daily hazard rates whose support is at
    least ``min_support``. Years without data are left out.
    """
    series = hazard_series(dataset, spans, min_support)
    by_year: dict[int, list[RatePoint]] = {}
    for p in series.points:
        by_year.setdefault(p.age_days // YEAR_DAYS + 1, []).append(p)

    out = []
    for year in sorted(by_year):
        pts = by_year[year]
        if mode == "pooled":
            den = sum(p.denominator for p in pts)
            if den:
                out.append((year, sum(p.numerator for p in pts) / den))
        elif mode == "mean_of_daily":
            rates = [p.rate for p in pts if not p.low_support]
            if rates:
                out.append((year, float(np.mean(rates))))
        else:
            raise ValueError(f"unknown yearly mode {mode!r}")
    return out


def write_series_csv(series: RateSeries, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    label = "age_days" if series.scale == "age" else "day"
    writer.writerow([label, "numerator", "denominator", "rate", "low_support"])
    for p in series.points:
        writer.writerow(
            [p.age_days, p.numerator, p.denominator, repr(p.rate), str(p.low_support).lower()]
        )


def read_series_csv(source: IO[str] | Iterable[str], kind: str, min_support: int = 1) -> RateSeries:
    """Load a series written by :func:`write_series_csv`."""
    reader = csv.DictReader(source)
    age_col = "age_days" if "age_days" in (reader.fieldnames or []) else "day"
    points = tuple(
        RatePoint(int(r[age_col]), int(r["numerator"]), int(r["denominator"]))
        for r in reader
    )
    scale = "age" if age_col == "age_days" else "wallclock"
    return apply_min_support(RateSeries(kind, points, scale=scale), min_support)
