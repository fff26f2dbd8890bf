from __future__ import annotations

from datetime import date, datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import START, make_log
from writetrace.errors import EmptyCohort, EventOutOfCalendar
from writetrace.features import (
    DailySeries,
    EditCategory,
    SemesterCalendar,
    build_daily_series,
    category_percentages,
    cohort_daily_average,
    features_from_csv,
    features_to_csv,
    student_features,
    weekly_edit_categories,
    weekly_session_categories,
)


def test_calendar_windows(cal):
    assert cal.n_days == 70
    assert list(cal.h1_weeks) == [1, 2, 3, 4, 5]
    assert list(cal.h2_weeks) == [6, 7, 8, 9, 10]
    assert cal.window_days("h1") == range(0, 35)
    assert cal.window_days("h2") == range(35, 70)
    assert cal.window_days("full") == range(0, 70)


def test_calendar_rejects_non_monday():
    with pytest.raises(ValueError):
        SemesterCalendar(date(2021, 9, 28))


def test_calendar_round_trip(cal):
    assert SemesterCalendar.from_dict(cal.to_dict()) == cal


def test_day_index_uses_local_midnight():
    cal = SemesterCalendar(START, timezone="Europe/London")
    # 23:30 UTC on Monday is 00:30 on Tuesday in London (BST)
    assert cal.day_index(datetime(2021, 9, 27, 23, 30, tzinfo=timezone.utc)) == 1
    assert cal.day_index(datetime(2021, 9, 26, 22, 0, tzinfo=timezone.utc)) is None


def test_daily_series_sums_both_kinds(cal):
    log = make_log([(0, 10), (0, 4, "del"), (3, 7)])
    s = build_daily_series(log, cal)
    assert s.chars[0] == 14 and s.revisions[0] == 2
    assert s.chars[3] == 7 and s.revisions[3] == 1
    assert s.chars.sum() == 21
    assert build_daily_series(log, cal, "insert-only").chars[0] == 10


def test_deletion_only_day_is_active(cal):
    s = build_daily_series(make_log([(2, 5, "del")]), cal, "insert-only")
    assert s.chars[2] == 0 and s.active[2]


def test_out_of_calendar_events_warn(cal):
    log = make_log([(-1, 3), (5, 2), (70, 9)])
    with pytest.warns(EventOutOfCalendar) as rec:
        s = build_daily_series(log, cal)
    assert s.out_of_calendar == 2
    assert rec[0].message.count == 2
    assert s.chars.sum() == 2


def test_example_features_match_hand_count(cal):
    # three active days in week 1, one in week 3, one in week 7
    log = make_log([(0, 10), (1, 20), (1, 5), (4, 30), (15, 35), (44, 70)])
    s = build_daily_series(log, cal)
    h1 = student_features(s, "h1")
    assert h1.total_rev == 5
    assert h1.total_active_day == 4
    assert h1.total_active_week == 2
    assert h1.avg_str_count_per_day == pytest.approx(100 / 35)
    assert h1.avg_rev_per_day == pytest.approx(5 / 35)
    assert h1.avg_str_count_per_week == pytest.approx(20.0)
    assert h1.avg_rev_per_week == pytest.approx(1.0)
    h2 = student_features(s, "h2")
    assert (h2.total_rev, h2.total_active_day, h2.total_active_week) == (1, 1, 1)
    assert student_features(s, "full").total_active_week == 3


def test_inactive_student_has_zero_features(cal):
    s = build_daily_series(make_log([]), cal)
    f = student_features(s)
    assert (f.total_rev, f.total_active_day, f.total_active_week) == (0, 0, 0)
    assert f.avg_str_count_per_day == 0.0


def test_cohort_average_counts_inactive_students(cal):
    a = build_daily_series(make_log([(0, 10)], "a"), cal)
    b = build_daily_series(make_log([], "b"), cal)
    avg = cohort_daily_average([a, b])
    assert avg.chars[0] == 5.0
    with pytest.raises(EmptyCohort):
        cohort_daily_average([])


def test_window_keeps_weekday_alignment(cal):
    s = build_daily_series(make_log([(36, 3)]), cal)
    h2 = s.window("h2")
    assert h2.first_day == 35 and h2.start_weekday == 0
    assert h2.chars[1] == 3 and h2.dates[1] == date(2021, 11, 2)


def test_weekly_categories(cal):
    log = make_log([(0, 1), (7, 1), (8, 1), (9, 1)])
    cats = weekly_edit_categories(build_daily_series(log, cal), "h1")
    assert [c.category for c in cats] == [EditCategory.ONCE, EditCategory.TWICE_OR_MORE] + [EditCategory.NO_EDIT] * 3
    assert [c.week for c in cats] == [1, 2, 3, 4, 5]


def test_session_categories_split_on_idle_gap(cal):
    # same day, two edits 10 minutes apart then one 2 hours later
    log = make_log([(0, 1, "ins", 9), (0, 1, "ins", 9), (0, 1, "ins", 12), (7, 1, "ins", 10)])
    cats = weekly_session_categories(log, cal, "h1")
    assert cats[0].category is EditCategory.TWICE_OR_MORE
    assert cats[1].category is EditCategory.ONCE
    day_cats = weekly_edit_categories(build_daily_series(log, cal), "h1")
    assert day_cats[0].category is EditCategory.ONCE


def test_category_percentages_sum_to_100(cal):
    cats = [weekly_edit_categories(build_daily_series(make_log([(0, 1)]), cal), "h1"),
            weekly_edit_categories(build_daily_series(make_log([(0, 1), (1, 1)]), cal), "h1")]
    pct = category_percentages(cats)
    assert pct[EditCategory.NO_EDIT] == pytest.approx(80.0)
    assert pct[EditCategory.ONCE] == pytest.approx(10.0)
    assert sum(pct.values()) == pytest.approx(100.0)


def test_features_csv_round_trip(cal):
    s = build_daily_series(make_log([(0, 10), (9, 3), (40, 2)]), cal)
    rows = [("s1", student_features(s, w)) for w in ("h1", "h2", "full")]
    text = features_to_csv(rows)
    assert text.splitlines()[0] == ("student_id,window,TotalRev,AvgStrCountPerDay,AvgRevPerDay,TotalActiveDay,"
                                    "AvgStrCountPerWeek,AvgRevPerWeek,TotalActiveWeek")
    back = features_from_csv(text)
    for sid, f in rows:
        assert back[(sid, f.window)] == f


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 69), st.integers(1, 500)), max_size=40),
       st.floats(0.01, 100, allow_nan=False))
def test_feature_invariants(spec, c):
    cal = SemesterCalendar(START)
    s = build_daily_series(make_log(spec), cal)
    for w in ("h1", "h2", "full"):
        f = student_features(s, w)
        n_weeks = len(cal.window_weeks(w))
        assert f.total_active_day <= 7 * f.total_active_week
        assert f.total_active_week <= n_weeks
        assert f.avg_str_count_per_week == pytest.approx(7 * f.avg_str_count_per_day)
        g = student_features(s.scaled(c), w)
        assert g.avg_str_count_per_day == pytest.approx(c * f.avg_str_count_per_day)
        assert g.total_active_day == f.total_active_day
    full, h1, h2 = (student_features(s, w) for w in ("full", "h1", "h2"))
    assert full.total_rev == h1.total_rev + h2.total_rev
    assert full.total_active_day == h1.total_active_day + h2.total_active_day


def test_series_rejects_negative():
    cal = SemesterCalendar(START)
    with pytest.raises(ValueError):
        DailySeries("x", cal, np.full(70, -1.0), np.zeros(70, dtype=int))
