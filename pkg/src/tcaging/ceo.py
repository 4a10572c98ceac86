"""Creation-Execution-Outcome (CEO) log ingestion.

Two CSV tables make up a dataset::

    creations.csv   test_case,creation_time
    executions.csv  test_case,execution_time,outcome,session_start

Timestamps are ISO-8601 and normalized to UTC at second resolution. A
timestamp without an offset is taken to be UTC.
"""

from __future__ import annotations

import csv
import enum
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from functools import cached_property
from typing import IO, Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


class CeoError(ValueError):
    """Base class for ingestion errors."""


class RowError(CeoError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DatasetError(CeoError):
    pass


class Outcome(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"


class InferMode(str, enum.Enum):
    STRICT = "strict"
    INFER_MISSING = "infer-missing"
    INFER_ALL = "infer-all"


@dataclass(frozen=True)
class CsvSchema:
    """Column names for the two CEO tables."""

    test_case: str = "test_case"
    creation_time: str = "creation_time"
    execution_time: str = "execution_time"
    outcome: str = "outcome"
    session_start: str = "session_start"


@dataclass(frozen=True)
class CreationRecord:
    test_case: str
    creation_time: datetime


@dataclass(frozen=True)
class RawExecution:
    test_case: str
    execution_time: datetime
    outcome_label: str
    session_start: datetime | None = None
    line: int = 0


@dataclass(frozen=True)
class ExecutionRecord:
    test_case: str
    execution_time: datetime
    outcome: Outcome
    session_start: datetime | None = None
    line: int = field(default=0, compare=False)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime (seconds)."""
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    if text[-1] in "zZ":
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


def _reader(source: IO[str] | Iterable[str], required: Sequence[str]) -> csv.DictReader:
    reader = csv.DictReader(source)
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise DatasetError(f"missing column(s): {', '.join(missing)}")
    return reader


def _cell(row: Mapping[str, str | None], name: str) -> str:
    return (row.get(name) or "").strip()


def parse_creations(
    source: IO[str] | Iterable[str], schema: CsvSchema = CsvSchema()
) -> list[CreationRecord]:
    reader = _reader(source, [schema.test_case, schema.creation_time])
    records: list[CreationRecord] = []
    seen: dict[str, int] = {}
    for row in reader:
        line = reader.line_num
        name = _cell(row, schema.test_case)
        if not name:
            raise RowError(line, "missing test_case")
        raw_ts = _cell(row, schema.creation_time)
        try:
            ts = parse_timestamp(raw_ts)
        except ValueError:
            raise RowError(line, f"malformed timestamp {raw_ts!r}") from None
        if name in seen:
            raise DatasetError(
                f"duplicate test case {name!r} on lines {seen[name]} and {line}"
            )
        seen[name] = line
        records.append(CreationRecord(name, ts))
    return records


def parse_executions(
    source: IO[str] | Iterable[str], schema: CsvSchema = CsvSchema()
) -> list[RawExecution]:
    """Parse execution rows, keeping outcome labels as written.

    The session column is optional, both in the header and per row.
    """
    reader = _reader(source, [schema.test_case, schema.execution_time, schema.outcome])
    rows: list[RawExecution] = []
    for row in reader:
        line = reader.line_num
        name = _cell(row, schema.test_case)
        if not name:
            raise RowError(line, "missing test_case")
        raw_ts = _cell(row, schema.execution_time)
        try:
            ts = parse_timestamp(raw_ts)
        except ValueError:
            raise RowError(line, f"malformed timestamp {raw_ts!r}") from None
        raw_session = _cell(row, schema.session_start)
        session = None
        if raw_session:
            try:
                session = parse_timestamp(raw_session)
            except ValueError:
                raise RowError(line, f"malformed session timestamp {raw_session!r}") from None
        rows.append(RawExecution(name, ts, _cell(row, schema.outcome), session, line))
    return rows


@dataclass(frozen=True)
class OutcomeMapPolicy:
    """Case-insensitive mapping of raw outcome labels to PASS, FAIL or DROP.

    Labels not in the mapping are dropped.
    """

    mapping: Mapping[str, str] = field(
        default_factory=lambda: {"pass": "PASS", "fail": "FAIL", "failed": "FAIL"}
    )

    def __post_init__(self):
        norm = {}
        for label, target in self.mapping.items():
            target = target.strip().upper()
            if target not in ("PASS", "FAIL", "DROP"):
                raise ValueError(f"bad outcome target {target!r} for label {label!r}")
            norm[label.strip().lower()] = target
        object.__setattr__(self, "mapping", norm)

    @classmethod
    def from_pairs(cls, pairs: Iterable[str], base: "OutcomeMapPolicy | None" = None):
        """Build a policy from ``raw_label=PASS|FAIL|DROP`` strings.

        Pairs extend (and override) the default policy unless *base* is given.
        """
        mapping = dict((base or cls()).mapping)
        for pair in pairs:
            pair = pair.strip()
            if not pair or pair.startswith("#"):
                continue
            label, sep, target = pair.partition("=")
            if not sep:
                raise ValueError(f"expected raw_label=PASS|FAIL|DROP, got {pair!r}")
            mapping[label.strip().lower()] = target
        return cls(mapping)

    def map(self, label: str) -> Outcome | None:
        target = self.mapping.get(label.strip().lower(), "DROP")
        return None if target == "DROP" else Outcome(target)


def map_outcomes(
    rows: Iterable[RawExecution], policy: OutcomeMapPolicy = OutcomeMapPolicy()
) -> tuple[list[ExecutionRecord], int]:
    records = []
    dropped = 0
    for row in rows:
        outcome = policy.map(row.outcome_label)
        if outcome is None:
            dropped += 1
            continue
        records.append(
            ExecutionRecord(row.test_case, row.execution_time, outcome, row.session_start, row.line)
        )
    if dropped:
        logger.warning("dropped %d execution(s) with unmapped outcome labels", dropped)
    return records, dropped


def infer_creations(
    executions: Iterable[ExecutionRecord],
    creations: Iterable[CreationRecord],
    mode: InferMode | str = InferMode.STRICT,
) -> list[CreationRecord]:
    """Complete the creation table from first executions.

    ``infer-missing`` fills gaps with the earliest execution of each test case,
    ``infer-all`` replaces every creation time that way, and ``strict`` only
    checks that nothing is missing.
    """
    mode = InferMode(mode)
    first: dict[str, datetime] = {}
    for ex in executions:
        cur = first.get(ex.test_case)
        if cur is None or ex.execution_time < cur:
            first[ex.test_case] = ex.execution_time
    known = {c.test_case: c.creation_time for c in creations}

    if mode is InferMode.STRICT:
        missing = sorted(set(first) - set(known))
        if missing:
            raise DatasetError(f"no creation record for test case(s): {', '.join(missing)}")
        return [CreationRecord(n, t) for n, t in known.items()]

    out = dict(known)
    for name, ts in first.items():
        if mode is InferMode.INFER_ALL or name not in out:
            out[name] = ts
    return [CreationRecord(n, out[n]) for n in sorted(out)]


@dataclass(frozen=True)
class CeoDataset:
    """Validated creation and execution tables.

    Executions are sorted by (test_case, execution_time). ``t1`` and ``tM`` are
    derived from the executions, so any filtered copy carries its own bounds.
    """

    creations: tuple[CreationRecord, ...]
    executions: tuple[ExecutionRecord, ...]
    rejected_before_creation: int = 0
    duplicates_removed: int = 0
    unknown_dropped: int = 0

    @cached_property
    def t1(self) -> datetime:
        return min(e.execution_time for e in self.executions)

    @cached_property
    def tM(self) -> datetime:
        return max(e.execution_time for e in self.executions)

    @cached_property
    def origin(self) -> date:
        """Calendar date of day index 0 (the date of ``t1``)."""
        return self.t1.date()

    def day_index(self, ts: datetime) -> int:
        return (ts.astimezone(timezone.utc).date() - self.origin).days

    @cached_property
    def last_day(self) -> int:
        return self.day_index(self.tM)

    def creation_times(self) -> dict[str, datetime]:
        return {c.test_case: c.creation_time for c in self.creations}

    def executions_by_test(self) -> dict[str, list[ExecutionRecord]]:
        groups: dict[str, list[ExecutionRecord]] = defaultdict(list)
        for ex in self.executions:
            groups[ex.test_case].append(ex)
        return dict(groups)

    @property
    def warning_count(self) -> int:
        return self.rejected_before_creation + self.duplicates_removed + self.unknown_dropped

    def replace_executions(self, executions: Iterable[ExecutionRecord]) -> "CeoDataset":
        executions = tuple(executions)
        if not executions:
            raise DatasetError("no executions")
        return CeoDataset(
            self.creations,
            executions,
            self.rejected_before_creation,
            self.duplicates_removed,
            self.unknown_dropped,
        )


def validate_dataset(
    creations: Iterable[CreationRecord],
    executions: Iterable[ExecutionRecord],
    strict: bool = True,
) -> CeoDataset:
    creations = list(creations)
    created: dict[str, datetime] = {}
    for c in creations:
        if c.test_case in created:
            raise DatasetError(f"duplicate test case {c.test_case!r}")
        created[c.test_case] = c.creation_time

    executions = list(executions)
    if not executions:
        raise DatasetError("no executions")

    unknown = Counter(e.test_case for e in executions if e.test_case not in created)
    if unknown and strict:
        names = ", ".join(sorted(unknown))
        raise DatasetError(f"executions reference unknown test case(s): {names}")
    for name, n in sorted(unknown.items()):
        logger.warning("dropping %d execution(s) of unknown test case %r", n, name)

    kept = []
    early = 0
    for ex in executions:
        ct = created.get(ex.test_case)
        if ct is None:
            continue
        if ex.execution_time < ct:
            early += 1
            logger.warning(
                "%srejecting execution of %r at %s: before creation at %s",
                f"line {ex.line}: " if ex.line else "",
                ex.test_case,
                format_timestamp(ex.execution_time),
                format_timestamp(ct),
            )
            continue
        kept.append(ex)

    unique = []
    seen = set()
    for ex in kept:
        key = (ex.test_case, ex.execution_time, ex.outcome, ex.session_start)
        if key in seen:
            continue
        seen.add(key)
        unique.append(ex)
    dups = len(kept) - len(unique)
    if dups:
        logger.warning("removed %d exact duplicate execution row(s)", dups)

    if not unique:
        raise DatasetError("no executions")
    unique.sort(key=lambda e: (e.test_case, e.execution_time))
    return CeoDataset(
        tuple(sorted(creations, key=lambda c: c.test_case)),
        tuple(unique),
        rejected_before_creation=early,
        duplicates_removed=dups,
        unknown_dropped=sum(unknown.values()),
    )


def filter_allfail_sessions(
    dataset: CeoDataset, min_session_size: int = 2
) -> tuple[CeoDataset, int]:
    """Remove sessions in which every execution failed.

    Only sessions with at least ``min_session_size`` executions are candidates;
    executions without a session label are always kept.
    """
    sessions: dict[datetime, list[ExecutionRecord]] = defaultdict(list)
    for ex in dataset.executions:
        if ex.session_start is not None:
            sessions[ex.session_start].append(ex)
    doomed = {
        key
        for key, group in sessions.items()
        if len(group) >= min_session_size and all(e.outcome is Outcome.FAIL for e in group)
    }
    if not doomed:
        return dataset, 0
    kept = [e for e in dataset.executions if e.session_start not in doomed]
    return dataset.replace_executions(kept), len(doomed)


def write_creations(records: Iterable[CreationRecord], out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["test_case", "creation_time"])
    for r in records:
        writer.writerow([r.test_case, format_timestamp(r.creation_time)])


def write_executions(records: Iterable[ExecutionRecord], out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["test_case", "execution_time", "outcome", "session_start"])
    for r in records:
        session = format_timestamp(r.session_start) if r.session_start else ""
        writer.writerow(
            [r.test_case, format_timestamp(r.execution_time), r.outcome.value, session]
        )


def load_dataset(
    creations_path,
    executions_path,
    policy: OutcomeMapPolicy = OutcomeMapPolicy(),
    infer: InferMode | str = InferMode.STRICT,
) -> CeoDataset:
    """Read, map, complete and validate a dataset from two CSV files.

    ``creations_path`` may be None when creation times are to be inferred.
    """
    with open(executions_path, newline="", encoding="utf-8") as fh:
        raw = parse_executions(fh)
    records, _ = map_outcomes(raw, policy)
    creations: list[CreationRecord] = []
    if creations_path is not None:
        with open(creations_path, newline="", encoding="utf-8") as fh:
            creations = parse_creations(fh)
    creations = infer_creations(records, creations, infer)
    return validate_dataset(creations, records, strict=True)
