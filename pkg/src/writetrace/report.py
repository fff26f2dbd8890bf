"""Cohort comparisons: editing-frequency tables, rank tests, correlations, t-tests and figures.

Within-cohort comparisons pair day i of the first half with day i of the
second half (same weekday, since both halves start on a Monday). Between-cohort
comparisons use the daily cohort-average values of a period unless
``unit="student"`` is requested.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .charts import Line, line_chart
from .errors import AllZeroDifferences, DegenerateVariance, EmptyGroup, MismatchedIds
from .features import (
    FEATURE_NAMES,
    WEEKDAY_NAMES,
    DailySeries,
    EditCategory,
    SemesterCalendar,
    StudentFeatures,
    build_daily_series,
    category_percentages,
    cohort_daily_average,
    features_to_csv,
    student_features,
    weekly_edit_categories,
    weekly_session_categories,
)
from .revlog import RevisionLog, parse_revision_log
from .srl import (
    SrlLevel,
    SrlScores,
    cluster_proportion_test,
    dimension_alphas,
    kmeans_2,
    parse_questionnaire_csv,
    score_questionnaire,
)
from .stats import (
    TestResult,
    independent_t_test,
    mann_whitney_u,
    pearson_r,
    summarize,
    wilcoxon_signed_rank,
)
from .timeseries import decompose_series

log = logging.getLogger(__name__)

COHORT_COLORS = {"control": "#1f77b4", "intervention": "#d62728"}
CLUSTER_COLORS = {
    "control:HighSRL": "#1f77b4",
    "control:LowSRL": "#17becf",
    "intervention:HighSRL": "#d62728",
    "intervention:LowSRL": "#ff7f0e",
}
HALF_COLORS = {"h1": "#1f77b4", "h2": "#d62728"}
T_TEST_FEATURES = ("total_rev", "total_active_day", "total_active_week")


@dataclass
class CohortData:
    name: str
    series: dict[str, DailySeries]
    logs: dict[str, RevisionLog] = field(default_factory=dict)
    clusters: dict[str, SrlLevel] = field(default_factory=dict)
    srl_scores: dict[str, SrlScores] = field(default_factory=dict)
    srl_alphas: dict[str, float] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)
    cluster_result: object = None

    @property
    def student_ids(self) -> list[str]:
        return sorted(self.series)


@dataclass
class CohortStudy:
    calendar: SemesterCalendar
    control: CohortData
    intervention: CohortData

    def __post_init__(self):
        overlap = set(self.control.series) & set(self.intervention.series)
        if overlap:
            raise ValueError(f"student ids appear in both cohorts: {sorted(overlap)[:5]}")

    @property
    def cohorts(self) -> dict[str, CohortData]:
        return {"control": self.control, "intervention": self.intervention}

    @property
    def is_empty(self) -> bool:
        return not self.control.series and not self.intervention.series

    def members(self, group: str) -> list[str]:
        """Student ids of ``"control"``, ``"intervention"`` or ``"<cohort>:<HighSRL|LowSRL>"``."""
        cohort_name, _, level = group.partition(":")
        cohort = self.cohorts[cohort_name]
        ids = cohort.student_ids
        if level:
            ids = [sid for sid in ids if cohort.clusters.get(sid) is SrlLevel(level)]
        return ids

    def group_series(self, group: str) -> list[DailySeries]:
        cohort = self.cohorts[group.partition(":")[0]]
        return [cohort.series[sid] for sid in self.members(group)]

    def group_average(self, group: str) -> DailySeries:
        series = self.group_series(group)
        if not series:
            raise EmptyGroup(f"group {group!r} has no students")
        return cohort_daily_average(series, owner=group)

    def groups(self, grouping: str) -> list[str]:
        if grouping == "cohort":
            return ["control", "intervention"]
        if grouping == "cluster":
            return [f"{c}:{lvl.value}" for c in ("control", "intervention") for lvl in SrlLevel]
        raise ValueError(f"unknown grouping {grouping!r}")


def cohort_from_logs(name: str, logs: Sequence[RevisionLog], calendar: SemesterCalendar,
                     count_mode: str = "both") -> CohortData:
    series = {lg.student_id: build_daily_series(lg, calendar, count_mode) for lg in logs}
    return CohortData(name, series, {lg.student_id: lg for lg in logs})


def attach_clusters(cohort: CohortData, responses, seed: int = 0, scale=(1, 5), standardized: bool = True) -> None:
    """Score questionnaires and run the two-cluster split for one cohort."""
    responses = [r for r in responses if r.student_id in cohort.series]
    if len(responses) < 2:
        return
    scores = [score_questionnaire(r, scale) for r in responses]
    result = kmeans_2(scores, seed, ids=[r.student_id for r in responses], standardized=standardized)
    cohort.srl_scores = {r.student_id: s for r, s in zip(responses, scores)}
    cohort.clusters = {a.student_id: a.cluster for a in result.assignments}
    cohort.cluster_result = result
    try:
        cohort.srl_alphas = dimension_alphas(responses)
    except Exception as exc:  # degenerate questionnaire data: report without reliability
        log.warning("reliability not computed for %s: %s", cohort.name, exc)


def load_cohort(directory: Path, name: str, calendar: SemesterCalendar, *, count_mode: str = "both",
                cluster_seed: int = 0, scale=(1, 5), standardized: bool = True) -> CohortData:
    """Read ``logs/*.csv`` plus optional ``srl.csv`` and ``scores.csv`` from a cohort directory."""
    directory = Path(directory)
    logs = []
    for path in sorted((directory / "logs").glob("*.csv")):
        with path.open("rb") as fh:
            logs.append(parse_revision_log(fh, path.stem, tz=calendar.timezone))
    cohort = cohort_from_logs(name, logs, calendar, count_mode)
    srl_path = directory / "srl.csv"
    if srl_path.exists():
        attach_clusters(cohort, parse_questionnaire_csv(srl_path.read_text(), scale), cluster_seed, scale,
                        standardized)
    scores_path = directory / "scores.csv"
    if scores_path.exists():
        cohort.scores = {row["student_id"]: float(row["score"])
                         for row in csv.DictReader(io.StringIO(scores_path.read_text()))}
    return cohort


def load_study(directory: Path, **kw) -> CohortStudy:
    directory = Path(directory)
    calendar = SemesterCalendar.from_dict(json.loads((directory / "calendar.json").read_text()))
    cohorts = {}
    for name in ("control", "intervention"):
        sub = directory / name
        cohorts[name] = load_cohort(sub, name, calendar, **kw) if sub.exists() else CohortData(name, {})
    return CohortStudy(calendar, cohorts["control"], cohorts["intervention"])


# --- Table 1 / Table 4-style editing frequency -------------------------------------------------------------------

def editing_frequency_table(study: CohortStudy, grouping: str = "cohort", mode: str = "days") -> list[dict]:
    """Percentage of student-weeks with no edit, one edit, or two or more, per group and half.

    ``mode="days"`` counts active days per week; ``mode="sessions"`` counts
    writing sessions (30-minute idle gap) and needs the raw logs.
    """
    rows = []
    for group in study.groups(grouping):
        ids = study.members(group)
        if not ids:
            raise EmptyGroup(f"group {group!r} has no students")
        cohort = study.cohorts[group.partition(":")[0]]
        for period in ("h1", "h2"):
            if mode == "days":
                cats = [weekly_edit_categories(cohort.series[sid], period) for sid in ids]
            elif mode == "sessions":
                cats = [weekly_session_categories(cohort.logs[sid], study.calendar, period) for sid in ids]
            else:
                raise ValueError(f"unknown mode {mode!r}")
            pct = category_percentages(cats)
            rows.append({
                "group": group,
                "period": period,
                **{c.value: pct[c] for c in EditCategory},
                "student_weeks": sum(len(c) for c in cats),
            })
    return rows


# --- rank-test comparisons ---------------------------------------------------------------------------------------

def _daily_values(study: CohortStudy, group: str, period: str, unit: str) -> np.ndarray:
    if unit == "day":
        return study.group_average(group).window(period).chars
    if unit == "student":
        series = study.group_series(group)
        if not series:
            raise EmptyGroup(f"group {group!r} has no students")
        return np.array([student_features(s, period).avg_str_count_per_day for s in series])
    raise ValueError(f"unknown unit {unit!r}")


def within_cohort_comparison(study: CohortStudy, group: str, *, exclude_inactive: bool = False,
                             **test_kw) -> TestResult:
    """Signed-rank test of the group's daily average, first half vs second half.

    With ``exclude_inactive`` a pair is dropped when either of its days has no
    activity; sample sizes in the effect size shrink accordingly.
    """
    avg = study.group_average(group)
    h1, h2 = avg.window("h1").chars, avg.window("h2").chars
    summaries = {"h1": summarize(h1), "h2": summarize(h2)}
    n1, n2 = len(h1), len(h2)
    if exclude_inactive:
        keep = (h1 > 0) & (h2 > 0)
        n1, n2 = int(np.count_nonzero(h1 > 0)), int(np.count_nonzero(h2 > 0))
        h1, h2 = h1[keep], h2[keep]
    try:
        result = wilcoxon_signed_rank(h1, h2, n_x=n1, n_y=n2, **test_kw)
    except AllZeroDifferences:
        return TestResult("wilcoxon_signed_rank", 0.0, 1.0, z_value=0.0, effect_size_r=0.0,
                          group_summaries=summaries, note="no change")
    result.group_summaries = summaries
    return result


def between_cohort_comparison(study: CohortStudy, period: str, metric: str = "avg_str_count_per_day", *,
                              groups: tuple[str, str] = ("control", "intervention"), unit: str = "day",
                              exclude_inactive: bool = False, **test_kw) -> TestResult:
    """Mann-Whitney U between two groups' AvgStrCountPerDay values within a period."""
    if metric != "avg_str_count_per_day":
        raise ValueError("only avg_str_count_per_day is compared with rank tests")
    a = _daily_values(study, groups[0], period, unit)
    b = _daily_values(study, groups[1], period, unit)
    summaries = {groups[0]: summarize(a), groups[1]: summarize(b)}
    if exclude_inactive:
        a, b = a[a > 0], b[b > 0]
    result = mann_whitney_u(a, b, **test_kw)
    result.group_summaries = summaries
    return result


# --- correlations and t-tests ------------------------------------------------------------------------------------

def feature_correlation_report(features: dict[str, StudentFeatures], scores: dict[str, float]) -> list[tuple[str, TestResult]]:
    """Pearson r between reflective scores and each of the seven features."""
    if set(features) != set(scores):
        missing = sorted(set(features) ^ set(scores))
        raise MismatchedIds(f"feature and score ids differ: {missing[:5]}")
    ids = sorted(features)
    y = [scores[i] for i in ids]
    out = []
    for attr, display in FEATURE_NAMES.items():
        x = [getattr(features[i], attr) for i in ids]
        out.append((display, pearson_r(x, y)))
    return out


def feature_mean_comparison(study: CohortStudy, period: str,
                            feature_list: Sequence[str] = T_TEST_FEATURES) -> list[tuple[str, TestResult]]:
    """Pooled-variance t-tests, control minus intervention, per feature."""
    out = []
    for attr in feature_list:
        a = [getattr(student_features(s, period), attr) for s in study.group_series("control")]
        b = [getattr(student_features(s, period), attr) for s in study.group_series("intervention")]
        try:
            out.append((FEATURE_NAMES[attr], independent_t_test(a, b)))
        except DegenerateVariance:
            # identical constant groups: no difference to test
            summaries = {"a": summarize(a), "b": summarize(b)}
            if summaries["a"].mean != summaries["b"].mean:
                raise
            out.append((FEATURE_NAMES[attr], TestResult("independent_t_test", 0.0, 1.0, df=len(a) + len(b) - 2,
                                                        group_summaries=summaries, note="zero variance")))
    return out


# --- figures -----------------------------------------------------------------------------------------------------

def group_seasonality(study: CohortStudy, group: str, period: str, source: str = "cohort",
                      seasonal_period: int = 7) -> np.ndarray:
    """Seasonal indices (Mon..Sun) of a group for one half.

    ``source="cohort"`` decomposes the group's average series;
    ``source="per_student"`` averages the students' own seasonal indices.
    """
    if source == "cohort":
        return decompose_series(study.group_average(group).window(period), seasonal_period).seasonal_indices
    if source == "per_student":
        series = study.group_series(group)
        if not series:
            raise EmptyGroup(f"group {group!r} has no students")
        return np.mean([decompose_series(s.window(period), seasonal_period).seasonal_indices for s in series], axis=0)
    raise ValueError(f"unknown seasonality source {source!r}")


def _write(path: Path, text: str, written: list[Path]) -> None:
    path.write_text(text, encoding="utf-8")
    written.append(path)


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def export_figures(study: CohortStudy, out_dir: Path, *, seasonality_source: str = "cohort",
                   seasonal_period: int = 7) -> list[Path]:
    """Daily-series plots per half and weekly seasonality overlays, plus the CSVs behind them."""
    if study.is_empty:
        log.warning("empty study: no figures written")
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    cal = study.calendar

    for fig, grouping, colors in (("fig2", "cohort", COHORT_COLORS), ("fig4", "cluster", CLUSTER_COLORS)):
        groups = [g for g in study.groups(grouping) if study.members(g)]
        if not groups:
            continue
        averages = {g: study.group_average(g) for g in groups}
        for period in ("h1", "h2"):
            days = cal.window_days(period)
            lines = [Line(g, colors[g], averages[g].window(period).chars.tolist()) for g in groups]
            label = "before" if period == "h1" else "after"
            _write(out_dir / f"{fig}_{period}.svg", line_chart(
                lines, title=f"AvgStrCountPerDay by {grouping}, {period.upper()} ({label} the intervention)",
                x_label="Date", y_label="Edited characters per day",
                x_tick_labels=[cal.date_of(d).strftime("%d %b") for d in days], gridlines_every=7), written)
        rows = [["date", *groups]]
        for d in range(cal.n_days):
            rows.append([cal.date_of(d).isoformat(), *(_fmt(float(averages[g].chars[d])) for g in groups)])
        _write(out_dir / f"{fig}_daily.csv", _csv(rows), written)

    for fig, grouping in (("fig3", "cohort"), ("fig5", "cluster")):
        rows = [["group", "period", *WEEKDAY_NAMES]]
        for g in study.groups(grouping):
            if not study.members(g):
                continue
            halves = {p: group_seasonality(study, g, p, seasonality_source, seasonal_period) for p in ("h1", "h2")}
            for p, idx in halves.items():
                rows.append([g, p, *(_fmt(float(v)) for v in idx)])
            lines = [Line(f"{p.upper()}", HALF_COLORS[p], halves[p].tolist()) for p in ("h1", "h2")]
            ticks = list(WEEKDAY_NAMES) if seasonal_period == 7 else [str(i) for i in range(seasonal_period)]
            _write(out_dir / f"{fig}_{g.replace(':', '_')}.svg", line_chart(
                lines, title=f"Extracted seasonality of AvgStrCountPerDay, {g}", x_label="Day of week",
                y_label="Seasonal component", x_tick_labels=ticks), written)
        if len(rows) > 1:
            _write(out_dir / f"{fig}_seasonality.csv", _csv(rows), written)
    return written


# --- full report -------------------------------------------------------------------------------------------------

def _result_row(label: str, r: TestResult, order: Sequence[str]) -> list:
    row = [label]
    for key in order:
        s = r.group_summaries.get(key)
        row += [s.n, s.inactive_days, _fmt(s.median), _fmt(s.iqr)] if s else ["", "", "", ""]
    return row + [_fmt(r.statistic), _fmt(r.z_value), _fmt(r.p_two_tailed), _fmt(r.effect_size_r), r.stars, r.note or ""]


def _rank_header(a: str, b: str) -> list[str]:
    return ["comparison", f"{a}_n", f"{a}_inactive_days", f"{a}_median", f"{a}_iqr",
            f"{b}_n", f"{b}_inactive_days", f"{b}_median", f"{b}_iqr", "statistic", "z", "p", "effect_size_r",
            "stars", "note"]


def write_report(study: CohortStudy, out_dir: Path, *, exclude_inactive: bool = False, unit: str = "day",
                 seasonality_source: str = "cohort", seasonal_period: int = 7, frequency_mode: str = "days",
                 continuity: bool = True, zero_method: str = "wilcox") -> list[Path]:
    """Write ``table1.csv`` .. ``table6.csv``, the figure files and ``summary.json``."""
    if study.is_empty:
        log.warning("empty study: nothing to report")
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    summary: dict = {"calendar": study.calendar.to_dict(), "options": {
        "exclude_inactive": exclude_inactive, "unit": unit, "seasonality_source": seasonality_source,
        "seasonal_period": seasonal_period, "frequency_mode": frequency_mode, "continuity": continuity,
        "zero_method": zero_method}}
    has_clusters = all(c.clusters for c in study.cohorts.values())

    # raw inputs behind every table cell
    raw = out_dir / "raw"
    raw.mkdir(exist_ok=True)
    rows = [["cohort", "student_id", "date", "chars", "revisions"]]
    for name, cohort in study.cohorts.items():
        for sid in cohort.student_ids:
            s = cohort.series[sid]
            rows += [[name, sid, d.isoformat(), _fmt(float(c)), int(r)] for d, c, r in zip(s.dates, s.chars, s.revisions)]
    _write(raw / "daily_series.csv", _csv(rows), written)
    feat_rows = [(f"{name}:{sid}", student_features(c.series[sid], w))
                 for name, c in study.cohorts.items() for sid in c.student_ids for w in ("h1", "h2", "full")]
    _write(raw / "features.csv", features_to_csv(feat_rows), written)
    if has_clusters:
        rows = [["cohort", "student_id", "cluster", "gs", "p", "e", "se"]]
        for name, c in study.cohorts.items():
            for a in c.cluster_result.assignments:
                rows.append([name, a.student_id, a.cluster.value, *(repr(float(v)) for v in c.srl_scores[a.student_id].as_array())])
        _write(raw / "clusters.csv", _csv(rows), written)

    # Table 1: editing frequency per week, by cohort (and by cluster when available)
    header = ["group", "period", *(c.value for c in EditCategory), "student_weeks"]
    both_cohorts = all(study.members(g) for g in study.groups("cohort"))
    t1 = editing_frequency_table(study, "cohort", frequency_mode) if both_cohorts else []
    t1_rows = [header] + [[r["group"], r["period"], *(f"{r[c.value]:.4f}" for c in EditCategory), r["student_weeks"]]
                          for r in t1]
    if has_clusters:
        try:
            tc = editing_frequency_table(study, "cluster", frequency_mode)
            t1_rows += [[r["group"], r["period"], *(f"{r[c.value]:.4f}" for c in EditCategory), r["student_weeks"]]
                        for r in tc]
        except EmptyGroup as exc:
            log.warning("cluster frequency table skipped: %s", exc)
    _write(out_dir / "table1.csv", _csv(t1_rows), written)
    summary["table1"] = t1_rows

    # Table 2: within-cohort signed-rank tests
    t2 = [_rank_header("h1", "h2")]
    summary["table2"] = {}
    for g in study.groups("cohort"):
        if study.members(g):
            r = within_cohort_comparison(study, g, exclude_inactive=exclude_inactive, continuity=continuity,
                                             zero_method=zero_method)
            t2.append(_result_row(g, r, ("h1", "h2")))
            summary["table2"][g] = r.to_dict()
    _write(out_dir / "table2.csv", _csv(t2), written)

    # Table 3: between-cohort Mann-Whitney per half
    t3 = [_rank_header("control", "intervention")]
    summary["table3"] = {}
    if both_cohorts:
        for period in ("h1", "h2"):
            r = between_cohort_comparison(study, period, unit=unit, exclude_inactive=exclude_inactive,
                                          continuity=continuity)
            t3.append(_result_row(period, r, ("control", "intervention")))
            summary["table3"][period] = r.to_dict()
    _write(out_dir / "table3.csv", _csv(t3), written)

    # Table 4: within-cluster signed-rank tests
    t4 = [_rank_header("h1", "h2")]
    summary["table4"] = {}
    if has_clusters:
        for g in study.groups("cluster"):
            if study.members(g):
                r = within_cohort_comparison(study, g, exclude_inactive=exclude_inactive, continuity=continuity,
                                             zero_method=zero_method)
                t4.append(_result_row(g, r, ("h1", "h2")))
                summary["table4"][g] = r.to_dict()
        summary["cluster_proportions"] = cluster_proportion_test(
            study.control.cluster_result.assignments, study.intervention.cluster_result.assignments).to_dict()
        summary["srl_alphas"] = {n: c.srl_alphas for n, c in study.cohorts.items()}
        summary["avg_within_centroid_distance"] = {
            n: c.cluster_result.avg_within_centroid_distance for n, c in study.cohorts.items()}
    _write(out_dir / "table4.csv", _csv(t4), written)

    # Table 5: correlations with reflective scores, both cohorts pooled, full semester
    t5 = [["feature", "r", "p", "n", "stars"]]
    summary["table5"] = {}
    feats, scores = {}, {}
    for name, c in study.cohorts.items():
        for sid in c.student_ids:
            if sid in c.scores:
                feats[f"{name}:{sid}"] = student_features(c.series[sid], "full")
                scores[f"{name}:{sid}"] = c.scores[sid]
    if len(feats) >= 3:
        for display, r in feature_correlation_report(feats, scores):
            t5.append([display, _fmt(r.statistic), _fmt(r.p_two_tailed), len(feats), r.stars])
            summary["table5"][display] = r.to_dict()
    _write(out_dir / "table5.csv", _csv(t5), written)

    # Table 6: independent t-tests per half
    t6 = [["period", "feature", "control_mean", "control_sd", "intervention_mean", "intervention_sd", "t", "df", "p",
           "stars", "note"]]
    summary["table6"] = {}
    if all(len(study.members(g)) >= 2 for g in study.groups("cohort")):
        for period in ("h1", "h2"):
            for display, r in feature_mean_comparison(study, period):
                a, b = r.group_summaries["a"], r.group_summaries["b"]
                t6.append([period, display, _fmt(a.mean), _fmt(a.sd), _fmt(b.mean), _fmt(b.sd), _fmt(r.statistic),
                           r.df, _fmt(r.p_two_tailed), r.stars, r.note or ""])
                summary["table6"][f"{period}:{display}"] = r.to_dict()
    _write(out_dir / "table6.csv", _csv(t6), written)

    written += export_figures(study, out_dir, seasonality_source=seasonality_source, seasonal_period=seasonal_period)
    _write(out_dir / "summary.json", json.dumps(summary, indent=1, sort_keys=True, default=_json_default) + "\n",
           written)
    return written


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")
