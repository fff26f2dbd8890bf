"""Fixed FeedbackInput shared by the feedback tests and the golden-file generator."""

from __future__ import annotations

import numpy as np

from conftest import START, make_log
from writetrace.feedback import FeedbackInput, build_feedback_input
from writetrace.features import DailySeries, SemesterCalendar, build_daily_series


def fixture_input() -> FeedbackInput:
    cal = SemesterCalendar(START)
    # active in weeks 3 and 4 only, most writing in week 4
    student = build_daily_series(make_log([(15, 120), (22, 400), (23, 380), (26, 90)], "s042"), cal)
    days = np.arange(cal.n_days)
    cohort = DailySeries("cohort:intervention", cal, 60 + 40 * (days % 7 == 2) + 35 * (days % 7 == 5),
                         np.ones(cal.n_days))
    reference = DailySeries("cohort:control", cal, 50 + 70 * (days % 7 == 6), np.ones(cal.n_days))
    return build_feedback_input(student, cohort, reference, student_id="s042")
