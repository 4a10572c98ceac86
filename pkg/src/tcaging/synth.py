"""Synthetic CEO datasets with known activation and failure-rate profiles.

A profile is a JSON object, for example::

    {
      "n_test_cases": 1000, "horizon_days": 500, "seed": 7,
      "creation": {"kind": "uniform"},
      "activation": {"kind": "constant", "p": 0.8},
      "hazard": {"kind": "quadratic", "initial": 0.12, "zero_age": 800},
      "session": "nightly"
    }

Creation schedules: ``uniform`` (optional ``first_day``/``last_day``) or
``batches`` (``days``, optional ``sizes``; default equal split).
Activation families: ``constant`` (p), ``ramp`` (start, end, ramp_days),
``step`` (before, after, step_age).
Hazard families: ``constant`` (q), ``linear`` (initial, zero_age),
``quadratic`` (initial, zero_age), ``exponential`` (initial, decay),
``bathtub`` (initial, decay, decay_end, wear_start, growth).

For every test case and every day from its creation up to the horizon, the
test runs with probability activation(age) and, when it runs, fails with
probability hazard(age). The generator draws from a single
:class:`~tcaging.prng.Xoshiro256StarStar` stream in a fixed order: creation
days (uniform schedule only), then per test case in index order, per day,
one draw for execution and, if executed, one for the outcome.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Any, Callable, Mapping

import numpy as np

from .ceo import (
    CeoDataset,
    CreationRecord,
    ExecutionRecord,
    Outcome,
    validate_dataset,
    write_creations,
    write_executions,
)
from .prng import Xoshiro256StarStar

CREATION_CLOCK = time(10, 0, 0)
SESSION_CLOCK = time(20, 0, 0)
EXECUTION_CLOCK = time(20, 0, 10)


class ProfileError(ValueError):
    pass


def _need(spec: Mapping, key: str) -> float:
    if key not in spec:
        raise ProfileError(f"{spec.get('kind')!r} profile needs {key!r}")
    return float(spec[key])


def activation_function(spec: Mapping) -> Callable[[float], float]:
    kind = spec.get("kind")
    if kind == "constant":
        p = _need(spec, "p")
        return lambda t: p
    if kind == "ramp":
        start, end, days = _need(spec, "start"), _need(spec, "end"), _need(spec, "ramp_days")
        if days <= 0:
            raise ProfileError("ramp_days must be positive")
        return lambda t: start + (end - start) * min(t, days) / days
    if kind == "step":
        before, after, at = _need(spec, "before"), _need(spec, "after"), _need(spec, "step_age")
        return lambda t: before if t < at else after
    raise ProfileError(f"unknown activation family {kind!r}")


def hazard_function(spec: Mapping) -> Callable[[float], float]:
    kind = spec.get("kind")
    if kind == "constant":
        q = _need(spec, "q")
        return lambda t: q
    if kind in ("linear", "quadratic"):
        q0, zero = _need(spec, "initial"), _need(spec, "zero_age")
        if zero <= 0:
            raise ProfileError("zero_age must be positive")
        power = 1 if kind == "linear" else 2
        return lambda t: q0 * max(0.0, 1 - t / zero) ** power
    if kind == "exponential":
        q0, b = _need(spec, "initial"), _need(spec, "decay")
        return lambda t: q0 * math.exp(-b * t)
    if kind == "bathtub":
        q0, b = _need(spec, "initial"), _need(spec, "decay")
        decay_end, wear, g = _need(spec, "decay_end"), _need(spec, "wear_start"), _need(spec, "growth")
        if wear < decay_end:
            raise ProfileError("bathtub wear_start must not precede decay_end")
        floor = q0 * math.exp(-b * decay_end)

        def bathtub(t):
            if t < decay_end:
                return q0 * math.exp(-b * t)
            if t < wear:
                return floor
            return floor * math.exp(g * (t - wear))

        return bathtub
    raise ProfileError(f"unknown hazard family {kind!r}")


def analytic_half_life(spec: Mapping) -> int | None:
    """Closed-form first whole age at which the hazard is at most half its start."""
    kind = spec.get("kind")
    if kind == "constant":
        return None
    if kind == "linear":
        return math.ceil(_need(spec, "zero_age") / 2)
    if kind == "quadratic":
        return math.ceil(_need(spec, "zero_age") * (1 - 1 / math.sqrt(2)))
    if kind == "exponential":
        return math.ceil(math.log(2) / _need(spec, "decay"))
    if kind == "bathtub":
        x = math.log(2) / _need(spec, "decay")
        return math.ceil(x) if x <= _need(spec, "decay_end") else None
    raise ProfileError(f"unknown hazard family {kind!r}")


@dataclass(frozen=True)
class SynthProfile:
    n_test_cases: int
    horizon_days: int
    activation: Mapping[str, Any]
    hazard: Mapping[str, Any]
    creation: Mapping[str, Any] = field(default_factory=lambda: {"kind": "uniform"})
    session: str = "nightly"
    seed: int = 0
    start_date: str = "2009-10-29"
    prefix: str = "TC"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SynthProfile":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ProfileError(f"unknown profile field(s): {', '.join(sorted(extra))}")
        try:
            profile = cls(**data)
        except TypeError as exc:
            raise ProfileError(str(exc)) from None
        profile.validate()
        return profile

    @classmethod
    def load(cls, path) -> "SynthProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_test_cases": self.n_test_cases,
            "horizon_days": self.horizon_days,
            "activation": dict(self.activation),
            "hazard": dict(self.hazard),
            "creation": dict(self.creation),
            "session": self.session,
            "seed": self.seed,
            "start_date": self.start_date,
            "prefix": self.prefix,
        }

    def validate(self) -> None:
        if self.n_test_cases < 1:
            raise ProfileError("n_test_cases must be positive")
        if self.horizon_days < 1:
            raise ProfileError("horizon_days must be positive")
        if self.session not in ("nightly", "none"):
            raise ProfileError("session must be 'nightly' or 'none'")
        if not 0 <= self.seed <= 0xFFFFFFFFFFFFFFFF:
            raise ProfileError("seed must be an unsigned 64-bit integer")
        date.fromisoformat(self.start_date)
        for label, fn in (
            ("activation", activation_function(self.activation)),
            ("hazard", hazard_function(self.hazard)),
        ):
            values = [fn(t) for t in range(self.horizon_days + 1)]
            bad = [t for t, v in enumerate(values) if not 0.0 <= v <= 1.0]
            if bad:
                raise ProfileError(f"{label} probability leaves [0, 1] at age {bad[0]}")
        self._creation_days(None)

    def _creation_days(self, rng: Xoshiro256StarStar | None) -> list[int]:
        spec = self.creation
        kind = spec.get("kind")
        n = self.n_test_cases
        if kind == "uniform":
            first = int(spec.get("first_day", 0))
            last = int(spec.get("last_day", self.horizon_days - 1))
            if not 0 <= first <= last < self.horizon_days:
                raise ProfileError("uniform creation window must lie inside the horizon")
            if rng is None:
                return []
            return [first + rng.randbelow(last - first + 1) for _ in range(n)]
        if kind == "batches":
            days = [int(d) for d in spec.get("days", [])]
            if not days or any(not 0 <= d < self.horizon_days for d in days):
                raise ProfileError("batch days must be non-empty and inside the horizon")
            sizes = spec.get("sizes")
            if sizes is None:
                sizes = [n // len(days) + (i < n % len(days)) for i in range(len(days))]
            if len(sizes) != len(days) or sum(sizes) != n:
                raise ProfileError("batch sizes must match days and sum to n_test_cases")
            return [d for d, k in zip(days, sizes) for _ in range(int(k))]
        raise ProfileError(f"unknown creation schedule {kind!r}")

    def test_name(self, i: int) -> str:
        width = max(4, len(str(self.n_test_cases)))
        return f"{self.prefix}-{i + 1:0{width}d}"


@dataclass(frozen=True)
class GroundTruth:
    profile: SynthProfile
    analytic_half_life_days: int | None

    def mean_hazard(self, first_age: int, last_age: int) -> float:
        """Unweighted mean of the hazard over whole ages first..last inclusive."""
        fn = hazard_function(self.profile.hazard)
        return float(np.mean([fn(t) for t in range(first_age, last_age + 1)]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": self.profile.to_dict(),
            "analytic_half_life_days": self.analytic_half_life_days,
            "prng": "xoshiro256** seeded by splitmix64(seed)",
        }


def _stamp(origin: date, day: int, clock: time, offset_s: int) -> datetime:
    base = datetime.combine(origin + timedelta(days=day), clock, tzinfo=timezone.utc)
    return base + timedelta(seconds=offset_s)


def generate(profile: SynthProfile) -> tuple[CeoDataset, GroundTruth]:
    profile.validate()
    rng = Xoshiro256StarStar(profile.seed)
    creation_days = profile._creation_days(rng)
    act_fn = activation_function(profile.activation)
    haz_fn = hazard_function(profile.hazard)
    horizon = profile.horizon_days
    act = [act_fn(t) for t in range(horizon)]
    haz = [haz_fn(t) for t in range(horizon)]
    origin = date.fromisoformat(profile.start_date)
    nightly = profile.session == "nightly"
    draw = rng.random

    creations = []
    executions = []
    for i, c in enumerate(creation_days):
        name = profile.test_name(i)
        offset = i % 3600
        creations.append(CreationRecord(name, _stamp(origin, c, CREATION_CLOCK, offset)))
        for day in range(c, horizon):
            age = day - c
            if draw() < act[age]:
                outcome = Outcome.FAIL if draw() < haz[age] else Outcome.PASS
                session = _stamp(origin, day, SESSION_CLOCK, 0) if nightly else None
                executions.append(
                    ExecutionRecord(name, _stamp(origin, day, EXECUTION_CLOCK, offset), outcome, session)
                )
    dataset = validate_dataset(creations, executions)
    return dataset, GroundTruth(profile, analytic_half_life(profile.hazard))


def write_outputs(dataset: CeoDataset, truth: GroundTruth, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "creations.csv"), "w", newline="", encoding="utf-8") as fh:
        write_creations(dataset.creations, fh)
    with open(os.path.join(out_dir, "executions.csv"), "w", newline="", encoding="utf-8") as fh:
        write_executions(dataset.executions, fh)
    with open(os.path.join(out_dir, "ground_truth.json"), "w", encoding="utf-8") as fh:
        json.dump(truth.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
