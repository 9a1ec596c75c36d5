"""Event logs: parsing (CSV, XES subset), variants, top-k filtering, splitting."""
from __future__ import annotations

import csv
import io
import math
import random
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence, Union

from .errors import (
    DegenerateSplitError,
    EmptyLogError,
    MalformedXmlError,
    MissingColumnError,
    MissingConceptNameError,
    UnparseableTimestampError,
)

Source = Union[str, Path, IO[bytes], IO[str], bytes]

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    timestamp: datetime | None
    event_id: str
    extra_attributes: dict[str, str] = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Trace:
    case_id: str
    activities: tuple[str, ...]

    def __post_init__(self):
        if not self.activities:
            raise ValueError(f"trace {self.case_id!r} is empty")

    def __len__(self) -> int:
        return len(self.activities)

    def __iter__(self) -> Iterator[str]:
        return iter(self.activities)


@dataclass(frozen=True)
class EventLog:
    """A multiset of traces. Trace order is kept so reports stay reproducible."""

    traces: tuple[Trace, ...] = ()

    @classmethod
    def from_sequences(cls, sequences: Iterable[Sequence[str]], prefix: str = "case") -> "EventLog":
        return cls(tuple(Trace(f"{prefix}{i}", tuple(s)) for i, s in enumerate(sequences)))

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(a for t in self.traces for a in t.activities)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    def __bool__(self) -> bool:
        return bool(self.traces)

    def sequences(self) -> list[tuple[str, ...]]:
        return [t.activities for t in self.traces]

    def multiset(self) -> Counter:
        """Trace multiset keyed by activity sequence (case ids ignored)."""
        return Counter(t.activities for t in self.traces)

    def __add__(self, other: "EventLog") -> "EventLog":
        return EventLog(self.traces + other.traces)


@dataclass(frozen=True)
class Variant:
    sequence: tuple[str, ...]
    count: int
    rank: int


@dataclass(frozen=True)
class CsvMapping:
    case_col: str = "case_id"
    activity_col: str = "activity"
    timestamp_col: str = "timestamp"
    # strptime format; None means ISO 8601
    timestamp_format: str | None = None
    delimiter: str = ","


def _open_text(source: Source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"), newline="")
    probe = source.read(0)
    if isinstance(probe, bytes):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")  # type: ignore[arg-type]
    return source  # type: ignore[return-value]


def parse_timestamp(value: str, fmt: str | None = None) -> datetime:
    """Parse to an aware UTC datetime truncated to milliseconds. Naive values are taken as UTC."""
    value = value.strip()
    if fmt is None:
        text = value[:-1] + "+00:00" if value.endswith(("Z", "z")) else value
        ts = datetime.fromisoformat(text)
    else:
        ts = datetime.strptime(value, fmt)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=ts.microsecond // 1000 * 1000)


def _build_log(events: list[Event]) -> EventLog:
    by_case: dict[str, list[tuple[int, Event]]] = {}
    for i, ev in enumerate(events):
        by_case.setdefault(ev.case_id, []).append((i, ev))
    traces = []
    for case_id, evs in by_case.items():
        if all(ev.timestamp is not None for _, ev in evs):
            evs.sort(key=lambda p: (p[1].timestamp, p[0]))
        traces.append(Trace(case_id, tuple(ev.activity for _, ev in evs)))
    if not traces:
        raise EmptyLogError("event log contains no events")
    return EventLog(tuple(traces))


def parse_csv(source: Source, mapping: CsvMapping | None = None) -> EventLog:
    """Read a CSV event log; one trace per distinct case id, in order of first appearance."""
    mapping = mapping or CsvMapping()
    stream = _open_text(source)
    try:
        reader = csv.DictReader(stream, delimiter=mapping.delimiter)
        header = reader.fieldnames or []
        for col in (mapping.case_col, mapping.activity_col, mapping.timestamp_col):
            if col not in header:
                raise MissingColumnError(col)
        known = {mapping.case_col, mapping.activity_col, mapping.timestamp_col, "event_id"}
        events = []
        for row_no, row in enumerate(reader, start=1):
            activity = (row[mapping.activity_col] or "").strip()
            case_id = (row[mapping.case_col] or "").strip()
            if not activity or not case_id:
                continue
            raw_ts = row[mapping.timestamp_col] or ""
            try:
                ts = parse_timestamp(raw_ts, mapping.timestamp_format)
            except ValueError:
                raise UnparseableTimestampError(row_no, raw_ts) from None
            extra = {k: v for k, v in row.items() if k not in known and k is not None and v is not None}
            events.append(Event(case_id, activity, ts, row.get("event_id") or f"e{row_no}", extra))
    finally:
        if isinstance(source, (str, Path)):
            stream.close()
    return _build_log(events)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_xes(source: Source) -> EventLog:
    """Read the XES subset: ``trace`` elements holding ``event`` elements with
    ``concept:name`` and (optionally) ``time:timestamp``."""
    try:
        if isinstance(source, bytes):
            root = ET.fromstring(source)
        else:
            root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise MalformedXmlError(f"malformed XES: {exc.msg}", exc.position) from None

    events: list[Event] = []
    event_index = 0
    for t_idx, trace_el in enumerate(el for el in root if _local(el.tag) == "trace"):
        case_id = f"trace{t_idx}"
        for attr in trace_el:
            if _local(attr.tag) == "string" and attr.get("key") == "concept:name":
                case_id = attr.get("value", case_id)
        for ev_el in trace_el:
            if _local(ev_el.tag) != "event":
                continue
            name = None
            ts = None
            extra = {}
            for attr in ev_el:
                key, value = attr.get("key"), attr.get("value")
                if key is None or value is None:
                    continue
                if key == "concept:name":
                    name = value
                elif key == "time:timestamp":
                    try:
                        ts = parse_timestamp(value)
                    except ValueError:
                        raise UnparseableTimestampError(event_index, value) from None
                else:
                    extra[key] = value
            if not name:
                raise MissingConceptNameError(event_index)
            events.append(Event(case_id, name, ts, f"e{event_index}", extra))
            event_index += 1
    return _build_log(events)


def write_csv(log: EventLog, stream: IO[str], mapping: CsvMapping | None = None) -> None:
    """Write ``log`` as CSV with synthetic, strictly increasing per-trace timestamps."""
    mapping = mapping or CsvMapping()
    writer = csv.writer(stream, delimiter=mapping.delimiter, lineterminator="\n")
    writer.writerow([mapping.case_col, mapping.activity_col, mapping.timestamp_col, "event_id"])
    n = 0
    for trace in log:
        for j, activity in enumerate(trace.activities):
            ts = _EPOCH + timedelta(seconds=j)
            stamp = ts.strftime(mapping.timestamp_format) if mapping.timestamp_format else ts.isoformat(timespec="milliseconds")
            writer.writerow([trace.case_id, activity, stamp, f"e{n}"])
            n += 1


def write_xes(log: EventLog, stream: IO[bytes]) -> None:
    root = ET.Element("log", {"xes.version": "1.0"})
    for trace in log:
        t_el = ET.SubElement(root, "trace")
        ET.SubElement(t_el, "string", key="concept:name", value=trace.case_id)
        for j, activity in enumerate(trace.activities):
            e_el = ET.SubElement(t_el, "event")
            ET.SubElement(e_el, "string", key="concept:name", value=activity)
            ts = _EPOCH + timedelta(seconds=j)
            ET.SubElement(e_el, "date", key="time:timestamp", value=ts.isoformat(timespec="milliseconds"))
    ET.ElementTree(root).write(stream, encoding="utf-8", xml_declaration=True)


def read_log(path: str | Path, mapping: CsvMapping | None = None) -> EventLog:
    """Dispatch on file extension (``.xes`` vs everything else as CSV)."""
    path = Path(path)
    if path.suffix.lower() == ".xes":
        return parse_xes(path)
    return parse_csv(path, mapping)


def extract_variants(log: EventLog) -> list[Variant]:
    counts = log.multiset()
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [Variant(seq, count, rank) for rank, (seq, count) in enumerate(ordered, start=1)]


def filter_top_k_variants(log: EventLog, k: int = 20) -> EventLog:
    if k < 1:
        raise ValueError("k must be >= 1")
    keep = {v.sequence for v in extract_variants(log) if v.rank <= k}
    return EventLog(tuple(t for t in log if t.activities in keep))


def split_log(log: EventLog, train_fraction: float = 0.75, seed: int = 0) -> tuple[EventLog, EventLog]:
    """Seeded trace-level partition; ``|train| = round(train_fraction * |log|)`` (half rounds up)."""
    if not log:
        raise EmptyLogError("cannot split an empty log")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(log)
    n_train = math.floor(train_fraction * n + 0.5)
    if n_train == 0 or n_train == n:
        raise DegenerateSplitError(f"split of {n} traces at {train_fraction} leaves one side empty")
    chosen = set(random.Random(seed).sample(range(n), n_train))
    train = tuple(t for i, t in enumerate(log.traces) if i in chosen)
    test = tuple(t for i, t in enumerate(log.traces) if i not in chosen)
    return EventLog(train), EventLog(test)
