"""Personalized behavioural-feedback emails and their comparison charts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .charts import Line, line_chart
from .errors import UnboundSlot
from .features import DailySeries, StudentFeatures, student_features

SLOTS = ("active_weeks", "dominant_week_clause", "late_start_clause", "cohort_comparison_clause", "chart_ref")
_SLOT_RE = re.compile(r"\{\{\s*(\w+)\s*\}\}")

STUDENT_COLOR = "#d62728"  # red
REFERENCE_COLOR = "#1f77b4"  # blue
COHORT_COLOR = "#2ca02c"  # green

DEFAULT_TEMPLATE = """\
Hello,

This note is about how you have been working on your reflection document so far. Comments on what you wrote come separately from your tutors.

Where am I going?
Reflective writing tends to go best when it becomes a small weekly routine rather than a single push before submission. Reacting to tutor comments while they are fresh also helps.

How am I going?
{{chart_ref}} {{cohort_comparison_clause}}
Up to now you have been active for {{active_weeks}}. {{late_start_clause}} {{dominant_week_clause}}

Where to next?
Pick one recurring moment in your week, such as the hour after a seminar, and add a short entry then. Regular short sessions matter more than the amount of text.

These figures are for your own planning only. They are not used for your summative assessment.

If anything here is unclear, just reply to this message.

Kind regards,
The module team
"""


@dataclass(frozen=True)
class PatternSummary:
    active_weeks: int
    dominant_week: int | None
    late_start: bool
    cohort_ahead: bool
    n_weeks: int = 5

    def __post_init__(self):
        if self.dominant_week is not None and not 1 <= self.dominant_week <= self.n_weeks:
            raise ValueError("dominant_week outside the feedback window")


@dataclass
class FeedbackInput:
    student_id: str
    student_series_h1: DailySeries
    cohort_series_h1: DailySeries
    reference_cohort_series_h1: DailySeries
    features_h1: StudentFeatures
    pattern: PatternSummary

    def __post_init__(self):
        spans = {(s.first_day, len(s)) for s in
                 (self.student_series_h1, self.cohort_series_h1, self.reference_cohort_series_h1)}
        if len(spans) != 1:
            raise ValueError("student, cohort and reference series must cover the same days")


def classify_pattern(features: StudentFeatures, series: DailySeries, cohort: DailySeries, reference: DailySeries,
                     *, dominant_share: float = 0.5, late_start_week: int = 3) -> PatternSummary:
    """Summarize a student's pre-intervention writing for the email clauses.

    ``series``, ``cohort`` and ``reference`` are the aligned feedback-window
    series. Week numbers are 1-based within that window. A dominant week holds
    more than ``dominant_share`` of the window's characters; a late start
    means the first active day falls in week ``late_start_week`` or later.
    """
    n_weeks = len(series) // 7
    weekly = series.chars.reshape(n_weeks, 7).sum(axis=1)
    total = weekly.sum()
    dominant = None
    if total > 0:
        top = int(np.argmax(weekly))
        if weekly[top] > dominant_share * total:
            dominant = top + 1
    active_days = np.flatnonzero(series.active)
    late = bool(len(active_days)) and bool(active_days[0] // 7 + 1 >= late_start_week)
    return PatternSummary(
        active_weeks=features.total_active_week,
        dominant_week=dominant,
        late_start=late,
        cohort_ahead=bool(cohort.chars.mean() > reference.chars.mean()),
        n_weeks=n_weeks,
    )


def build_feedback_input(student: DailySeries, cohort: DailySeries, reference: DailySeries, *,
                         window: str = "h1", student_id: str | None = None, **thresholds) -> FeedbackInput:
    """Window the full-semester series and derive features and pattern for one student."""
    s, c, r = student.window(window), cohort.window(window), reference.window(window)
    feats = student_features(student, window)
    sid = student_id or student.owner.split(":", 1)[-1]
    return FeedbackInput(sid, s, c, r, feats, classify_pattern(feats, s, c, r, **thresholds))


def _weeks(n: int) -> str:
    return f"{n} week" if n == 1 else f"{n} weeks"


def _slot_values(inp: FeedbackInput, chart_name: str) -> dict[str, str]:
    p = inp.pattern
    n = p.n_weeks
    if p.cohort_ahead:
        comparison = f"Across the first {n} weeks your group has been busier than the previous year's group was by this stage."
    else:
        comparison = f"Across the first {n} weeks your group has been quieter than the previous year's group was by this stage."
    if p.active_weeks == 0:
        late = "We have not seen any edits in your reflection document yet."
    elif p.late_start:
        late = "Your first edits came a few weeks in, and your activity has grown since then."
    else:
        late = ""
    if p.dominant_week is not None:
        dominant = f"More than half of the characters you edited so far fall in Week {p.dominant_week}, so your work is bunched into one week."
    elif p.active_weeks >= n:
        dominant = "You have made edits in every week so far. Keep that rhythm going."
    else:
        dominant = ""
    chart = (f"The attached chart ({chart_name}) plots characters edited per day over the first {n} weeks. "
             "Your line is red. The previous year's group is blue and your current group is green.")
    return {
        "active_weeks": _weeks(p.active_weeks),
        "dominant_week_clause": dominant,
        "late_start_clause": late,
        "cohort_comparison_clause": comparison,
        "chart_ref": chart,
    }


def render_feedback_email(inp: FeedbackInput, template: str = DEFAULT_TEMPLATE) -> str:
    """Fill ``{{slot}}`` markers; empty clauses leave no stray spaces behind."""
    values = _slot_values(inp, f"{inp.student_id}.svg")
    for name in _SLOT_RE.findall(template):
        if name not in values:
            raise UnboundSlot(name)
    text = _SLOT_RE.sub(lambda m: values[m.group(1)], template)
    lines = [re.sub(r" {2,}", " ", line).strip() for line in text.splitlines()]
    return "\n".join(lines).rstrip("\n") + "\n"


def render_comparison_chart(inp: FeedbackInput) -> str:
    n = len(inp.student_series_h1)
    return line_chart(
        [
            Line("You", STUDENT_COLOR, inp.student_series_h1.chars.tolist()),
            Line("Previous year's group", REFERENCE_COLOR, inp.reference_cohort_series_h1.chars.tolist()),
            Line("Current group", COHORT_COLOR, inp.cohort_series_h1.chars.tolist()),
        ],
        title=f"Edited characters per day, first {n // 7} weeks",
        x_label="Day",
        y_label="Characters edited per day",
        x_tick_labels=[str(i + 1) for i in range(n)],
        gridlines_every=7,
    )


def write_feedback(inp: FeedbackInput, out_dir: Path, template: str = DEFAULT_TEMPLATE) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    txt = out_dir / f"{inp.student_id}.txt"
    svg = out_dir / f"{inp.student_id}.svg"
    txt.write_text(render_feedback_email(inp, template), encoding="utf-8")
    svg.write_text(render_comparison_chart(inp), encoding="utf-8")
    return txt, svg
