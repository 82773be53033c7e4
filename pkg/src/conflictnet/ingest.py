"""Ingestion of victimization event records.

Parses delimiter-separated event and group-timeline files, validates that
every event falls inside the attributed group's activity interval, bins
events into analysis periods, and builds per-period incidence matrices of
victim counts (municipalities x armed structures).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .bipartite import IncidenceMatrix

VIOLENCE_TYPES = (
    "selective_killing",
    "forced_disappearance",
    "massacre",
    "kidnapping",
    "recruitment",
    "sexual_violence",
)

FACTIONS = ("farc", "paramilitary", "organized_crime")

# Default periodization of the study window, inclusive on both ends.
DEFAULT_PERIODS = (
    (1978, 1981),
    (1982, 1984),
    (1985, 1987),
    (1988, 1990),
    (1991, 1993),
    (1994, 1996),
    (1997, 1999),
    (2000, 2001),
    (2002, 2004),
    (2005, 2007),
)

EVENT_FIELDS = ("municipality_id", "group_id", "year", "violence_type", "victim_count")
TIMELINE_FIELDS = ("group_id", "active_from", "active_to", "faction")


class IngestError(ValueError):
    """Raised for malformed input rows or failed attribution lookups."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


@dataclass(frozen=True)
class EventRecord:
    """One victimization event attributed to an armed structure."""

    municipality_id: str
    group_id: str
    year: int
    violence_type: str
    victim_count: int

    def __post_init__(self):
        if not self.municipality_id:
            raise ValueError("municipality_id must be non-empty")
        if not self.group_id:
            raise ValueError("group_id must be non-empty")
        if self.violence_type not in VIOLENCE_TYPES:
            raise ValueError(f"unknown violence_type {self.violence_type!r}")
        if self.victim_count < 1:
            raise ValueError("victim_count must be at least 1 (nonpositive count)")


@dataclass(frozen=True)
class GroupTimeline:
    """Activity interval and faction for one armed structure."""

    group_id: str
    active_from: int
    active_to: int
    faction: str

    def __post_init__(self):
        if not self.group_id:
            raise ValueError("group_id must be non-empty")
        if self.active_from > self.active_to:
            raise ValueError(
                f"group {self.group_id}: active_from {self.active_from} "
                f"exceeds active_to {self.active_to}"
            )
        if self.faction not in FACTIONS:
            raise ValueError(f"unknown faction {self.faction!r}")

    def covers(self, year: int) -> bool:
        return self.active_from <= year <= self.active_to


@dataclass(frozen=True)
class PeriodPartition:
    """Ordered, non-overlapping, gap-free year intervals (inclusive ends)."""

    periods: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.periods:
            raise ValueError("at least one period is required")
        norm = tuple((int(a), int(b)) for a, b in self.periods)
        for start, end in norm:
            if start > end:
                raise ValueError(f"period {start}-{end} has start after end")
        for (_, prev_end), (start, _) in zip(norm, norm[1:]):
            if start != prev_end + 1:
                raise ValueError(
                    f"periods must be contiguous and ascending; "
                    f"found gap or overlap between {prev_end} and {start}"
                )
        object.__setattr__(self, "periods", norm)

    @classmethod
    def default(cls) -> "PeriodPartition":
        return cls(DEFAULT_PERIODS)

    def __len__(self) -> int:
        return len(self.periods)

    def index_of(self, year: int) -> int:
        """Index of the period containing ``year``; raises if uncovered."""
        for i, (start, end) in enumerate(self.periods):
            if start <= year <= end:
                return i
        raise ValueError(f"year {year} falls outside the period partition")

    def label(self, index: int) -> str:
        start, end = self.periods[index]
        return f"{start}-{end}"

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(len(self.periods))]


def _open_text(source) -> io.TextIOBase:
    # Accept a path, text stream, byte stream, or raw bytes/str content.
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _header_index(header: Sequence[str], wanted: Sequence[str],
                  schema: Mapping[str, str] | None) -> dict[str, int]:
    mapping = {f: (schema or {}).get(f, f) for f in wanted}
    index = {}
    for field, column in mapping.items():
        try:
            index[field] = header.index(column)
        except ValueError:
            raise IngestError(f"missing required column {column!r}", row=1) from None
    return index


def _parse_int(text: str, field: str, row: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise IngestError(
            f"row {row}: field {field!r} has non-numeric value {text!r}", row=row
        ) from None


def parse_events(source, schema: Mapping[str, str] | None = None) -> list[EventRecord]:
    """Parse event rows from a header-bearing CSV source.

    ``schema`` optionally remaps canonical field names to column headers.
    Any malformed row raises :class:`IngestError` carrying the 1-based row
    number of the offending line.
    """
    stream = _open_text(source)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input: no header row", row=0) from None
    idx = _header_index([h.strip() for h in header], EVENT_FIELDS, schema)

    events = []
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise IngestError(
                f"row {row_no}: expected {len(header)} fields, got {len(row)}",
                row=row_no,
            )
        year = _parse_int(row[idx["year"]], "year", row_no)
        count = _parse_int(row[idx["victim_count"]], "victim_count", row_no)
        vtype = row[idx["violence_type"]].strip()
        if vtype not in VIOLENCE_TYPES:
            raise IngestError(
                f"row {row_no}: unknown violence_type {vtype!r}", row=row_no
            )
        if count < 1:
            raise IngestError(
                f"row {row_no}: nonpositive count {count}", row=row_no
            )
        events.append(
            EventRecord(
                municipality_id=row[idx["municipality_id"]].strip(),
                group_id=row[idx["group_id"]].strip(),
                year=year,
                violence_type=vtype,
                victim_count=count,
            )
        )
    return events


def parse_timelines(source, schema: Mapping[str, str] | None = None) -> list[GroupTimeline]:
    """Parse group activity intervals; duplicate group ids are rejected."""
    stream = _open_text(source)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input: no header row", row=0) from None
    idx = _header_index([h.strip() for h in header], TIMELINE_FIELDS, schema)

    timelines = []
    seen = set()
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise IngestError(
                f"row {row_no}: expected {len(header)} fields, got {len(row)}",
                row=row_no,
            )
        gid = row[idx["group_id"]].strip()
        if gid in seen:
            raise IngestError(f"row {row_no}: duplicate group_id {gid!r}", row=row_no)
        seen.add(gid)
        faction = row[idx["faction"]].strip()
        if faction not in FACTIONS:
            raise IngestError(f"row {row_no}: unknown faction {faction!r}", row=row_no)
        timelines.append(
            GroupTimeline(
                group_id=gid,
                active_from=_parse_int(row[idx["active_from"]], "active_from", row_no),
                active_to=_parse_int(row[idx["active_to"]], "active_to", row_no),
                faction=faction,
            )
        )
    return timelines


def parse_periods(source) -> PeriodPartition:
    """Parse a JSON array of [start_year, end_year] pairs."""
    stream = _open_text(source)
    data = json.load(stream)
    if not isinstance(data, list) or not all(
        isinstance(p, list) and len(p) == 2 for p in data
    ):
        raise IngestError("periods file must be a JSON array of [start, end] pairs")
    return PeriodPartition(tuple((int(a), int(b)) for a, b in data))


def validate_attribution(
    events: Iterable[EventRecord],
    timelines: Iterable[GroupTimeline],
) -> tuple[list[EventRecord], list[tuple[EventRecord, str]]]:
    """Split events into accepted and rejected against activity intervals.

    An event referencing a group with no timeline at all is an error (the
    message names the group code); an event dated outside its group's
    interval is returned in the rejected list with a reason.
    """
    by_group = {t.group_id: t for t in timelines}
    accepted = []
    rejected = []
    for event in events:
        timeline = by_group.get(event.group_id)
        if timeline is None:
            raise IngestError(
                f"no activity timeline for group {event.group_id!r}"
            )
        if timeline.covers(event.year):
            accepted.append(event)
        else:
            rejected.append(
                (
                    event,
                    f"outside activity interval "
                    f"{timeline.active_from}-{timeline.active_to}",
                )
            )
    return accepted, rejected


def assign_periods(
    events: Iterable[EventRecord],
    partition: PeriodPartition,
) -> dict[int, list[EventRecord]]:
    """Bucket events by period index; every period key is present."""
    buckets: dict[int, list[EventRecord]] = {i: [] for i in range(len(partition))}
    for event in events:
        try:
            buckets[partition.index_of(event.year)].append(event)
        except ValueError:
            raise IngestError(
                f"event ({event.municipality_id}, {event.group_id}, {event.year}) "
                f"has year outside the period partition"
            ) from None
    return buckets


def build_incidence(events: Iterable[EventRecord]) -> IncidenceMatrix:
    """Sum victim counts into a municipality x structure incidence matrix.

    Row and column orders are the sorted distinct identifiers observed in
    ``events``; an empty event list yields the 0 x 0 matrix.
    """
    events = list(events)
    municipalities = sorted({e.municipality_id for e in events})
    structures = sorted({e.group_id for e in events})
    counts = np.zeros((len(municipalities), len(structures)), dtype=np.int64)
    row = {m: i for i, m in enumerate(municipalities)}
    col = {s: j for j, s in enumerate(structures)}
    for e in events:
        counts[row[e.municipality_id], col[e.group_id]] += e.victim_count
    return IncidenceMatrix(tuple(municipalities), tuple(structures), counts)
