from __future__ import annotations

import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from writetrace.features import SemesterCalendar  # noqa: E402
from writetrace.revlog import Kind, RevisionEvent, RevisionLog  # noqa: E402

DATA = Path(__file__).parent / "data"
START = date(2021, 9, 27)  # a Monday


@pytest.fixture
def cal() -> SemesterCalendar:
    return SemesterCalendar(START)


def at(day: int, hour: int = 12, minute: int = 0) -> datetime:
    """Aware UTC timestamp on calendar day ``day`` (0 = Monday of week 1)."""
    return datetime(START.year, START.month, START.day, hour, minute, tzinfo=timezone.utc) + timedelta(days=day)


def make_log(spec, student_id: str = "s1") -> RevisionLog:
    """Build a log from (day, n_chars) or (day, n_chars, "del") tuples."""
    events = []
    for rev, item in enumerate(spec, start=1):
        day, n = item[0], item[1]
        hour = item[3] if len(item) > 3 else 12
        if len(item) > 2 and item[2] == "del":
            events.append(RevisionEvent(Kind.DELETION, 0, n, "", rev, student_id, at(day, hour)))
        else:
            events.append(RevisionEvent(Kind.INSERTION, 0, n, "x" * n, rev, student_id, at(day, hour)))
    return RevisionLog(student_id, student_id, tuple(events))


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
