from __future__ import annotations

import re
import subprocess
import sys
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np
import pytest

from conftest import DATA, START, make_log
from feedback_fixture import fixture_input
from writetrace.charts import Line, line_chart, nice_ceiling
from writetrace.errors import UnboundSlot
from writetrace.feedback import (
    COHORT_COLOR,
    REFERENCE_COLOR,
    STUDENT_COLOR,
    FeedbackInput,
    PatternSummary,
    build_feedback_input,
    render_comparison_chart,
    render_feedback_email,
    write_feedback,
)
from writetrace.features import DailySeries, SemesterCalendar, build_daily_series

SVG = "{http://www.w3.org/2000/svg}"


def test_email_matches_golden():
    assert render_feedback_email(fixture_input()).encode("utf-8") == (DATA / "feedback_golden.txt").read_bytes()


def test_svg_matches_golden():
    assert render_comparison_chart(fixture_input()).encode("utf-8") == (DATA / "feedback_golden.svg").read_bytes()


def test_render_is_stable_in_a_fresh_interpreter(tmp_path):
    code = ("import sys; sys.path.insert(0, {tests!r}); from feedback_fixture import fixture_input; "
            "from writetrace.feedback import write_feedback; write_feedback(fixture_input(), {out!r})")
    tests = str(DATA.parent)
    subprocess.run([sys.executable, "-c", code.format(tests=tests, out=str(tmp_path))], check=True,
                   env={"PYTHONHASHSEED": "123", "PATH": ""}, cwd=tests)
    assert (tmp_path / "s042.txt").read_bytes() == (DATA / "feedback_golden.txt").read_bytes()
    assert (tmp_path / "s042.svg").read_bytes() == (DATA / "feedback_golden.svg").read_bytes()


def test_email_structure():
    text = render_feedback_email(fixture_input())
    for heading in ("Where am I going?", "How am I going?", "Where to next?"):
        assert heading in text
    assert re.search(r"active for \d+ weeks?", text)
    assert "active for 2 weeks" in text
    assert "not used for your summative assessment" in text
    assert "{{" not in text and "  " not in text


def test_pattern_summary():
    p = fixture_input().pattern
    assert p == PatternSummary(active_weeks=2, dominant_week=4, late_start=True, cohort_ahead=True)


def test_single_week_wording_and_praise():
    inp = fixture_input()
    one = replace(inp, pattern=PatternSummary(1, 1, False, False))
    assert "active for 1 week." in render_feedback_email(one)
    every = replace(inp, pattern=PatternSummary(5, None, False, False))
    assert "every week" in render_feedback_email(every)
    none = replace(inp, pattern=PatternSummary(0, None, False, False))
    assert "not seen any edits" in render_feedback_email(none)


def test_unbound_slot():
    with pytest.raises(UnboundSlot) as exc:
        render_feedback_email(fixture_input(), "Hi {{nickname}}")
    assert exc.value.name == "nickname"


def test_custom_template():
    assert render_feedback_email(fixture_input(), "You were active for {{ active_weeks }}.") == \
        "You were active for 2 weeks.\n"


def test_chart_lines_and_colors():
    root = ET.fromstring(render_comparison_chart(fixture_input()))
    lines = {p.get("data-label"): p for p in root.iter(SVG + "polyline")}
    assert lines["You"].get("stroke") == STUDENT_COLOR
    assert lines["Previous year's group"].get("stroke") == REFERENCE_COLOR
    assert lines["Current group"].get("stroke") == COHORT_COLOR
    assert all(len(p.get("points").split()) == 35 for p in lines.values())
    grid = [e for e in root.iter(SVG + "line") if e.get("class") == "grid"]
    assert len(grid) == 4  # week boundaries inside five weeks


def test_misaligned_series_rejected():
    inp = fixture_input()
    with pytest.raises(ValueError):
        full = DailySeries("c", inp.cohort_series_h1.calendar, np.zeros(70), np.zeros(70))
        FeedbackInput("x", inp.student_series_h1, full, inp.reference_cohort_series_h1, inp.features_h1, inp.pattern)


def test_write_feedback(tmp_path):
    txt, svg = write_feedback(fixture_input(), tmp_path)
    assert txt.name == "s042.txt" and svg.name == "s042.svg"


def test_steady_student_not_late():
    cal = SemesterCalendar(START)
    s = build_daily_series(make_log([(d, 50) for d in range(0, 35, 7)]), cal)
    flat = DailySeries("c", cal, np.full(70, 10.0), np.ones(70))
    inp = build_feedback_input(s, flat, flat)
    assert inp.pattern == PatternSummary(5, None, False, False)
    assert inp.student_id == "s1"


def test_nice_ceiling():
    assert [nice_ceiling(v) for v in (0.3, 1, 1.5, 3, 7, 420)] == [0.5, 1, 2, 5, 10, 500]


def test_chart_all_zero_and_negative():
    zero = line_chart([Line("a", "#000", [0, 0, 0])], title="t", x_label="x", y_label="y")
    ET.fromstring(zero)
    neg = line_chart([Line("a", "#000", [-3, 2, 1])], title="t", x_label="x", y_label="y")
    ys = [float(pt.split(",")[1]) for pt in ET.fromstring(neg).find(SVG + "polyline").get("points").split()]
    assert max(ys) <= 330 and min(ys) >= 40
