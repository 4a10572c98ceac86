from __future__ import annotations

import random
from datetime import date, datetime, timedelta, timezone

import pytest

from tcaging.ceo import CreationRecord, ExecutionRecord, Outcome, validate_dataset

BASE = date(2007, 8, 25)

# name -> (creation day, [(execution day, "P" | "F"), ...])
D1 = {
    "c1": (0, [(0, "P"), (1, "F"), (2, "P")]),
    "c2": (1, [(1, "F"), (3, "F")]),
}


def stamp(day: int, hour: int = 12, minute: int = 0, second: int = 0) -> datetime:
    return datetime.combine(BASE + timedelta(days=day), datetime.min.time(), tzinfo=timezone.utc) + timedelta(
        hours=hour, minutes=minute, seconds=second
    )


def build(spec: dict, sessions: bool = False):
    """Dataset from {name: (creation_day, [(day, "P"/"F"), ...])}.

    Creations happen at 08:00, executions from 20:00 on, so same-day runs are
    valid. With ``sessions`` every execution is labelled with its day's 20:00.
    """
    creations = [CreationRecord(name, stamp(c, 8)) for name, (c, _) in spec.items()]
    executions = []
    for name, (_, runs) in spec.items():
        for k, (day, o) in enumerate(runs):
            executions.append(
                ExecutionRecord(
                    name,
                    stamp(day, 20, k % 60, 10),
                    Outcome.PASS if o == "P" else Outcome.FAIL,
                    stamp(day, 20) if sessions else None,
                )
            )
    return validate_dataset(creations, executions)


def random_spec(rng: random.Random, max_tests: int = 10, max_days: int = 30) -> dict:
    spec = {}
    for i in range(rng.randint(1, max_tests)):
        c = rng.randrange(max_days)
        runs = [
            (rng.randint(c, max_days - 1), rng.choice("PF"))
            for _ in range(rng.randint(1, 8))
        ]
        spec[f"t{i}"] = (c, runs)
    return spec


def brute_force(spec):
    """Count straight from the (test case, age, outcome) triples of the spec."""
    # terminal age runs to the last execution whether or not the test died
    terminal = {name: max(d for d, _ in runs) - c for name, (c, runs) in spec.items()}
    triples = {(name, d - c, o) for name, (c, runs) in spec.items() for d, o in runs}
    hazard = {}
    for age in {a for _, a, _ in triples}:
        ran = {n for n, a, _ in triples if a == age}
        failed = {n for n, a, o in triples if a == age and o == "F"}
        hazard[age] = (len(failed), len(ran))
    activation = {}
    for age in range(max(terminal.values()) + 1):
        ran = {n for n, a, _ in triples if a == age}
        activation[age] = (len(ran), sum(t >= age for t in terminal.values()))
    return activation, hazard


@pytest.fixture
def d1():
    return build(D1)


# acceptance reporting: one line per criterion at the end of the run
_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _criteria[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
