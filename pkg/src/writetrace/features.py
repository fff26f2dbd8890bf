"""Semester calendar, per-day engagement series and the seven engagement features."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, fields
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Iterable, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import EmptyCohort, EventOutOfCalendar
from .revlog import RevisionLog, event_char_delta

WINDOWS = ("h1", "h2", "full")
WEEKDAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


@dataclass(frozen=True)
class SemesterCalendar:
    start_monday: date
    weeks: int = 10
    intervention_week: int = 6
    lecture_weekday: int = 1  # Tuesday
    timezone: str = "UTC"

    def __post_init__(self):
        if self.start_monday.weekday() != 0:
            raise ValueError(f"{self.start_monday} is not a Monday")
        if self.weeks < 2:
            raise ValueError("calendar needs at least two weeks")
        if not 2 <= self.intervention_week <= self.weeks:
            raise ValueError("intervention_week must lie in [2, weeks]")

    @property
    def tz(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)

    @property
    def n_days(self) -> int:
        return 7 * self.weeks

    @property
    def h1_weeks(self) -> range:
        return range(1, self.intervention_week)

    @property
    def h2_weeks(self) -> range:
        return range(self.intervention_week, self.weeks + 1)

    def window_weeks(self, window: str) -> range:
        if window == "h1":
            return self.h1_weeks
        if window == "h2":
            return self.h2_weeks
        if window == "full":
            return range(1, self.weeks + 1)
        raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")

    def window_days(self, window: str) -> range:
        """Day indices (0-based from start_monday) covered by a window."""
        wk = self.window_weeks(window)
        return range(7 * (wk.start - 1), 7 * (wk.stop - 1))

    def day_index(self, ts: datetime) -> int | None:
        """0-based day index of a timestamp's local date, or None outside the span."""
        local = ts.astimezone(self.tz).date()
        i = (local - self.start_monday).days
        return i if 0 <= i < self.n_days else None

    def date_of(self, day: int) -> date:
        return self.start_monday + timedelta(days=day)

    def week_of(self, day: int) -> int:
        return day // 7 + 1

    def to_dict(self) -> dict:
        return {
            "start_monday": self.start_monday.isoformat(),
            "weeks": self.weeks,
            "intervention_week": self.intervention_week,
            "lecture_weekday": self.lecture_weekday,
            "timezone": self.timezone,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SemesterCalendar":
        return cls(
            start_monday=date.fromisoformat(d["start_monday"]),
            weeks=int(d.get("weeks", 10)),
            intervention_week=int(d.get("intervention_week", 6)),
            lecture_weekday=int(d.get("lecture_weekday", 1)),
            timezone=d.get("timezone", "UTC"),
        )


@dataclass
class DailySeries:
    """Per-day edited characters and revision counts, one entry per calendar day.

    ``first_day`` is the calendar day index of the first entry, so a series
    restricted to a window still knows its dates and weekdays.
    """

    owner: str
    calendar: SemesterCalendar
    chars: np.ndarray
    revisions: np.ndarray
    first_day: int = 0
    out_of_calendar: int = 0

    def __post_init__(self):
        self.chars = np.asarray(self.chars, dtype=float)
        self.revisions = np.asarray(self.revisions)
        if self.chars.shape != self.revisions.shape or self.chars.ndim != 1:
            raise ValueError("chars and revisions must be 1-d and the same length")
        if np.any(self.chars < 0) or np.any(self.revisions < 0):
            raise ValueError("daily values must be non-negative")

    def __len__(self) -> int:
        return len(self.chars)

    @property
    def day_indices(self) -> range:
        return range(self.first_day, self.first_day + len(self.chars))

    @property
    def dates(self) -> list[date]:
        return [self.calendar.date_of(d) for d in self.day_indices]

    @property
    def start_weekday(self) -> int:
        return self.calendar.date_of(self.first_day).weekday()

    @property
    def active(self) -> np.ndarray:
        return (self.chars + self.revisions) > 0

    def window(self, window: str) -> "DailySeries":
        days = self.calendar.window_days(window)
        lo, hi = days.start - self.first_day, days.stop - self.first_day
        if lo < 0 or hi > len(self.chars):
            raise ValueError(f"series does not cover window {window!r}")
        return DailySeries(self.owner, self.calendar, self.chars[lo:hi], self.revisions[lo:hi], days.start)

    def scaled(self, c: float) -> "DailySeries":
        return DailySeries(self.owner, self.calendar, self.chars * c, self.revisions, self.first_day)


def build_daily_series(log: RevisionLog, cal: SemesterCalendar, count_mode: str = "both") -> DailySeries:
    """Sum edited characters and revision counts per calendar day.

    Events outside the calendar are not silently dropped: their count is kept
    on ``out_of_calendar`` and an ``EventOutOfCalendar`` warning is issued.
    """
    chars = np.zeros(cal.n_days)
    revs = np.zeros(cal.n_days, dtype=np.int64)
    outside = 0
    for e in log.events:
        d = cal.day_index(e.timestamp)
        if d is None:
            outside += 1
            continue
        chars[d] += event_char_delta(e, count_mode)
        revs[d] += 1
    if outside:
        warnings.warn(EventOutOfCalendar(outside, log.student_id), stacklevel=2)
    return DailySeries(f"student:{log.student_id}", cal, chars, revs, 0, outside)


def cohort_daily_average(series_set: Sequence[DailySeries], window: str | None = None,
                         owner: str = "cohort") -> DailySeries:
    """Per-day mean over all students; inactive students still count in the denominator."""
    if not series_set:
        raise EmptyCohort("cannot average an empty cohort")
    if window is not None:
        series_set = [s.window(window) for s in series_set]
    first = series_set[0]
    for s in series_set[1:]:
        if s.calendar != first.calendar or s.first_day != first.first_day or len(s) != len(first):
            raise ValueError("series do not share the same calendar span")
    chars = np.mean([s.chars for s in series_set], axis=0)
    revs = np.mean([s.revisions for s in series_set], axis=0)
    return DailySeries(f"cohort:{owner}", first.calendar, chars, revs, first.first_day)


@dataclass(frozen=True)
class StudentFeatures:
    total_rev: int
    avg_str_count_per_day: float
    avg_rev_per_day: float
    total_active_day: int
    avg_str_count_per_week: float
    avg_rev_per_week: float
    total_active_week: int
    window: str = "full"


# Display names used for CSV headers and report tables.
FEATURE_NAMES = {
    "total_rev": "TotalRev",
    "avg_str_count_per_day": "AvgStrCountPerDay",
    "avg_rev_per_day": "AvgRevPerDay",
    "total_active_day": "TotalActiveDay",
    "avg_str_count_per_week": "AvgStrCountPerWeek",
    "avg_rev_per_week": "AvgRevPerWeek",
    "total_active_week": "TotalActiveWeek",
}


def student_features(series: DailySeries, window: str = "full") -> StudentFeatures:
    s = series.window(window)
    n_days = len(s)
    n_weeks = n_days // 7
    active = s.active
    total_rev = int(s.revisions.sum())
    total_chars = float(s.chars.sum())
    weeks_active = int(active.reshape(n_weeks, 7).any(axis=1).sum())
    return StudentFeatures(
        total_rev=total_rev,
        avg_str_count_per_day=total_chars / n_days,
        avg_rev_per_day=total_rev / n_days,
        total_active_day=int(active.sum()),
        avg_str_count_per_week=total_chars / n_weeks,
        avg_rev_per_week=total_rev / n_weeks,
        total_active_week=weeks_active,
        window=window,
    )


class EditCategory(str, Enum):
    NO_EDIT = "NoEdit"
    ONCE = "Once"
    TWICE_OR_MORE = "TwiceOrMore"

    @classmethod
    def from_count(cls, n: int) -> "EditCategory":
        if n <= 0:
            return cls.NO_EDIT
        return cls.ONCE if n == 1 else cls.TWICE_OR_MORE


@dataclass(frozen=True)
class WeeklyEditCategory:
    week: int
    category: EditCategory


def weekly_edit_categories(series: DailySeries, window: str = "full") -> list[WeeklyEditCategory]:
    """Classify each week by its number of active days."""
    s = series.window(window)
    per_week = s.active.reshape(-1, 7).sum(axis=1)
    weeks = series.calendar.window_weeks(window)
    return [WeeklyEditCategory(w, EditCategory.from_count(int(n))) for w, n in zip(weeks, per_week)]


def weekly_session_categories(log: RevisionLog, cal: SemesterCalendar, window: str = "full",
                              idle_gap: timedelta = timedelta(minutes=30)) -> list[WeeklyEditCategory]:
    """Alternative weekly classification counting writing sessions instead of active days.

    A new session starts whenever the gap since the previous in-calendar event
    exceeds ``idle_gap``; a session is credited to the week it starts in.
    """
    sessions = np.zeros(cal.weeks, dtype=int)
    last: datetime | None = None
    for e in log.events:
        d = cal.day_index(e.timestamp)
        if d is None:
            continue
        if last is None or e.timestamp - last > idle_gap:
            sessions[cal.week_of(d) - 1] += 1
        last = e.timestamp
    return [WeeklyEditCategory(w, EditCategory.from_count(int(sessions[w - 1]))) for w in cal.window_weeks(window)]


def category_percentages(categories: Iterable[Sequence[WeeklyEditCategory]]) -> dict[EditCategory, float]:
    """Share of student-weeks in each category, in percent, pooled over students."""
    counts = {c: 0 for c in EditCategory}
    for student in categories:
        for wc in student:
            counts[wc.category] += 1
    total = sum(counts.values())
    if total == 0:
        raise EmptyCohort("no student-weeks to classify")
    return {c: 100.0 * n / total for c, n in counts.items()}


def features_to_csv(rows: Iterable[tuple[str, StudentFeatures]]) -> str:
    """One row per student and window; feature columns use their display names."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    names = list(FEATURE_NAMES)
    w.writerow(["student_id", "window", *FEATURE_NAMES.values()])
    for sid, f in rows:
        w.writerow([sid, f.window, *(_fmt(getattr(f, n)) for n in names)])
    return buf.getvalue()


def features_from_csv(text: str) -> dict[tuple[str, str], StudentFeatures]:
    reader = csv.DictReader(io.StringIO(text))
    out = {}
    int_fields = {f.name for f in fields(StudentFeatures) if f.type == "int"}
    for row in reader:
        kw = {}
        for attr, display in FEATURE_NAMES.items():
            kw[attr] = int(row[display]) if attr in int_fields else float(row[display])
        out[(row["student_id"], row["window"])] = StudentFeatures(**kw, window=row["window"])
    return out


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))
