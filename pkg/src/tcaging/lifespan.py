"""Test case life spans under the last-execution-with-grace death rule."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

from .ceo import CeoDataset

logger = logging.getLogger(__name__)

DEFAULT_GRACE_DAYS = 90


@dataclass(frozen=True)
class LifeSpan:
    """Creation day ``t0`` and last-execution day ``t_omega`` of one test case.

    Day indices count calendar days from the dataset's first execution date.
    ``end_day`` is the day of the dataset's last execution; alive test cases
    are considered part of the suite up to it.
    """

    test_case: str
    t0: int
    t_omega: int
    dead: bool
    end_day: int

    @property
    def terminal_age_days(self) -> int:
        return self.t_omega - self.t0

    @property
    def last_member_day(self) -> int:
        return self.t_omega if self.dead else self.end_day


@dataclass(frozen=True)
class AlivenessSummary:
    total: int
    dead: int
    dead_fraction: float
    mean_terminal_age_days: float
    sd_terminal_age_days: float

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "dead": self.dead,
            "dead_fraction": self.dead_fraction,
            "mean_terminal_age_days": self.mean_terminal_age_days,
            "sd_terminal_age_days": self.sd_terminal_age_days,
        }


def determine_death(dataset: CeoDataset, grace_days: int = DEFAULT_GRACE_DAYS) -> list[LifeSpan]:
    """Life spans for every executed test case, sorted by name.

    A test case is dead when more than ``grace_days`` days separate its last
    execution from the dataset's last execution; exactly ``grace_days`` is
    still alive. Test cases that were never executed are skipped.
    """
    if grace_days < 0:
        raise ValueError("grace period must be non-negative")
    end = dataset.last_day
    last: dict[str, int] = {}
    for ex in dataset.executions:
        day = dataset.day_index(ex.execution_time)
        if day > last.get(ex.test_case, -math.inf):
            last[ex.test_case] = day

    spans = []
    never_run = 0
    for c in dataset.creations:
        t_omega = last.get(c.test_case)
        if t_omega is None:
            never_run += 1
            continue
        spans.append(
            LifeSpan(
                c.test_case,
                dataset.day_index(c.creation_time),
                t_omega,
                end - t_omega > grace_days,
                end,
            )
        )
    if never_run:
        logger.warning("%d test case(s) have no executions and no life span", never_run)
    spans.sort(key=lambda s: s.test_case)
    return spans


def age_at(span: LifeSpan, t: int) -> int:
    return max(0, min(t, span.t_omega) - span.t0)


def aliveness_summary(spans: Sequence[LifeSpan]) -> AlivenessSummary:
    if not spans:
        raise ValueError("aliveness summary needs at least one life span")
    ages = [s.terminal_age_days for s in spans]
    dead = sum(s.dead for s in spans)
    sd = statistics.stdev(ages) if len(ages) > 1 else 0.0
    return AlivenessSummary(
        total=len(spans),
        dead=dead,
        dead_fraction=dead / len(spans),
        mean_terminal_age_days=statistics.fmean(ages),
        sd_terminal_age_days=sd,
    )


def age_distribution(spans: Sequence[LifeSpan], bin_width_days: int = 30) -> dict[int, int]:
    """Histogram of terminal ages keyed by bin start day.

    Bins run from 0 to the bin containing the oldest age, empty bins included.
    """
    if bin_width_days < 1:
        raise ValueError("bin width must be at least one day")
    if not spans:
        return {}
    ages = [s.terminal_age_days for s in spans]
    hist = {b * bin_width_days: 0 for b in range(max(ages) // bin_width_days + 1)}
    for a in ages:
        hist[(a // bin_width_days) * bin_width_days] += 1
    return hist


def growth_curve(spans: Sequence[LifeSpan]) -> list[tuple[int, int]]:
    """Number of test cases in the suite on each wall-clock day.

    A test case is counted from its creation day through its last execution
    if dead, or through the dataset's last day if alive.
    """
    if not spans:
        return []
    first = min(s.t0 for s in spans)
    end = max(s.end_day for s in spans)
    delta = [0] * (end - first + 2)
    for s in spans:
        delta[s.t0 - first] += 1
        delta[s.last_member_day - first + 1] -= 1
    curve = []
    alive = 0
    for i in range(end - first + 1):
        alive += delta[i]
        curve.append((first + i, alive))
    return curve
