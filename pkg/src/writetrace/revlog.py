"""Parsing and validation of document revision-log CSV exports.

Each export row is one atomic edit: an insertion or a deletion, the character
span it touched, the inserted text, the platform's revision counter, the
editing user and a timestamp.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime, timezone, tzinfo
from enum import Enum
from typing import IO, Iterable
from zoneinfo import ZoneInfo

from .errors import MalformedRow, MissingColumn, NonMonotonicRevision

COLUMNS = ("kind", "start_index", "end_index", "payload", "revision", "user_id", "timestamp")
COUNT_MODES = ("both", "insert-only")


class Kind(str, Enum):
    INSERTION = "insertion"
    DELETION = "deletion"


@dataclass(frozen=True, slots=True)
class RevisionEvent:
    kind: Kind
    start_index: int
    end_index: int
    payload: str
    revision_number: int
    user_id: str
    timestamp: datetime

    def __post_init__(self):
        if self.start_index < 0 or self.end_index < 0:
            raise ValueError("indices must be non-negative")
        if self.end_index < self.start_index:
            raise ValueError("end_index < start_index")
        if self.revision_number < 1:
            raise ValueError("revision number must be positive")
        if self.kind is Kind.INSERTION and not self.payload:
            raise ValueError("insertion with empty payload")
        if self.kind is Kind.DELETION and self.payload:
            raise ValueError("deletion with non-empty payload")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")


@dataclass(frozen=True)
class RevisionLog:
    document_id: str
    student_id: str
    events: tuple[RevisionEvent, ...]

    def __len__(self) -> int:
        return len(self.events)


def event_char_delta(event: RevisionEvent, count_mode: str = "both") -> int:
    """Characters touched by one edit.

    Insertions count their payload in Unicode code points; deletions count the
    removed span. With ``count_mode="insert-only"`` deletions contribute zero.
    """
    if event.kind is Kind.INSERTION:
        return len(event.payload)
    if count_mode == "insert-only":
        return 0
    return event.end_index - event.start_index


def parse_timestamp(text: str, tz: tzinfo = timezone.utc) -> datetime:
    """ISO-8601 to an aware datetime in ``tz``; naive input is taken as ``tz`` local time."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=tz)
    return ts.astimezone(tz)


def _as_text_stream(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"), newline="")
    if isinstance(source, str):
        return io.StringIO(source, newline="")
    if isinstance(source, io.TextIOBase):
        return source
    # binary file-like
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def _int_field(value: str, name: str, line: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise MalformedRow(line, f"{name} is not an integer: {value!r}") from None


def parse_revision_log(
    source,
    student_id: str,
    document_id: str | None = None,
    tz: tzinfo | str = timezone.utc,
) -> RevisionLog:
    """Parse a revision-log CSV export.

    ``source`` may be bytes, a string, or an open (text or binary) file. Column
    names are matched case-insensitively and in any order. Timestamps are
    normalized to ``tz``.
    """
    if isinstance(tz, str):
        tz = ZoneInfo(tz)
    reader = csv.reader(_as_text_stream(source))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(COLUMNS[0]) from None
    positions = {name.strip().lower(): i for i, name in enumerate(header)}
    for name in COLUMNS:
        if name not in positions:
            raise MissingColumn(name)
    idx = [positions[name] for name in COLUMNS]

    events: list[RevisionEvent] = []
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
        kind_s, start_s, end_s, payload, rev_s, user, ts_s = (row[i] for i in idx)
        try:
            kind = Kind(kind_s.strip().lower())
        except ValueError:
            raise MalformedRow(line, f"unknown kind {kind_s!r}") from None
        start = _int_field(start_s, "start_index", line)
        end = _int_field(end_s, "end_index", line)
        rev = _int_field(rev_s, "revision", line)
        try:
            ts = parse_timestamp(ts_s, tz)
        except ValueError:
            raise MalformedRow(line, f"bad timestamp {ts_s!r}") from None
        try:
            event = RevisionEvent(kind, start, end, payload, rev, user, ts)
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        if events:
            prev = events[-1]
            if rev <= prev.revision_number:
                raise NonMonotonicRevision(line, f"revision {rev} after {prev.revision_number}")
            if ts < prev.timestamp:
                raise NonMonotonicRevision(line, "timestamp decreases with revision number")
        events.append(event)

    return RevisionLog(document_id or student_id, student_id, tuple(events))


def format_timestamp(ts: datetime) -> str:
    out = ts.isoformat(timespec="seconds")
    return out[:-6] + "Z" if out.endswith("+00:00") else out


def serialize_revision_log(log: RevisionLog | Iterable[RevisionEvent]) -> str:
    """Render events back to the CSV export format (header included)."""
    events = log.events if isinstance(log, RevisionLog) else log
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for e in events:
        writer.writerow(
            (e.kind.value, e.start_index, e.end_index, e.payload, e.revision_number, e.user_id, format_timestamp(e.timestamp))
        )
    return buf.getvalue()


def total_chars(log: RevisionLog, count_mode: str = "both") -> int:
    return sum(event_char_delta(e, count_mode) for e in log.events)
