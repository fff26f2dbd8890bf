from __future__ import annotations

import json

import numpy as np
import pytest

from writetrace.features import build_daily_series, student_features
from writetrace.report import load_study
from writetrace.revlog import Kind, parse_revision_log
from writetrace.simcohort import (
    PATTERN_WEIGHTS,
    SimProfile,
    WeeklyPattern,
    default_profiles,
    generate_cohort,
    generate_questionnaires,
    generate_scores,
    simulate_study,
)
from writetrace.srl import SrlLevel, kmeans_2, score_questionnaire
from writetrace.stats import pearson_r


def test_pattern_weights_have_mean_one():
    for w in PATTERN_WEIGHTS.values():
        assert w.mean() == pytest.approx(1.0)
    assert int(np.argmax(PATTERN_WEIGHTS[WeeklyPattern.UNIMODAL_SUNDAY])) == 6
    top2 = set(np.argsort(PATTERN_WEIGHTS[WeeklyPattern.BIMODAL_WED_SAT])[-2:].tolist())
    assert top2 == {2, 5}


def test_same_seed_same_logs(cal):
    profiles = [(5, SimProfile())]
    a = generate_cohort(profiles, cal, 7)
    b = generate_cohort(profiles, cal, 7)
    c = generate_cohort(profiles, cal, 8)
    assert a.logs == b.logs and a.ground_truth == b.ground_truth
    assert a.logs != c.logs


def test_student_stream_independent_of_cohort_size(cal):
    small = generate_cohort([(2, SimProfile())], cal, 3)
    # spawned children are positional, so the first students agree
    big = generate_cohort([(4, SimProfile())], cal, 3)
    assert small.logs[0] == big.logs[0]


def test_ground_truth_matches_daily_series(cal):
    cohort = generate_cohort([(6, SimProfile(WeeklyPattern.UNIMODAL_SUNDAY, post_intervention_multiplier=1.5))],
                             cal, 11, deletion_fraction=0.3)
    for log in cohort.logs:
        truth = cohort.ground_truth["students"][log.student_id]
        s = build_daily_series(log, cal)
        np.testing.assert_array_equal(s.chars, truth["chars_per_day"])
        np.testing.assert_array_equal(s.revisions, truth["revisions_per_day"])
        np.testing.assert_array_equal(build_daily_series(log, cal, "insert-only").chars, truth["inserted_per_day"])
    assert any(e.kind is Kind.DELETION for log in cohort.logs for e in log.events)


def test_events_well_formed(cal):
    cohort = generate_cohort([(4, SimProfile())], cal, 1)
    for log in cohort.logs:
        revs = [e.revision_number for e in log.events]
        assert revs == sorted(set(revs))
        stamps = [e.timestamp for e in log.events]
        assert stamps == sorted(stamps)
        assert all(8 <= t.hour < 23 for t in stamps)


def test_deterministic_schedule(cal):
    p = SimProfile(active_weekdays=(2, 5), inactive_prob=0.9)
    cohort = generate_cohort([(3, p)], cal, 0)
    for log in cohort.logs:
        s = build_daily_series(log, cal)
        assert set(np.flatnonzero(s.active) % 7) == {2, 5}
        assert student_features(s).total_active_day == 20


def test_multiplier_raises_second_half(cal):
    flat = [(200, SimProfile(inactive_prob=0.0))]
    boost = [(200, SimProfile(inactive_prob=0.0, post_intervention_multiplier=2.0))]
    a = generate_cohort(flat, cal, 4)
    b = generate_cohort(boost, cal, 4)
    h = lambda c, w: np.mean([np.sum(v["chars_per_day"][w]) for v in c.ground_truth["students"].values()])
    first, second = slice(0, 35), slice(35, 70)
    assert h(a, first) == h(b, first)
    assert h(b, second) / h(a, second) == pytest.approx(2.0, rel=0.02)


def test_response_delay(cal):
    p = SimProfile(inactive_prob=0.0, sigma=0.0, post_intervention_multiplier=3.0, response_delay_days=4)
    truth = generate_cohort([(1, p)], cal, 0).ground_truth["students"]["s000"]["chars_per_day"]
    base = round(np.exp(5.5))
    assert truth[35] == base and truth[38] == base and truth[39] == round(3 * np.exp(5.5))


def test_profile_round_trip():
    p = SimProfile(WeeklyPattern.BIMODAL_WED_SAT, srl_level=SrlLevel.LOW, active_weekdays=(1, 3))
    assert SimProfile.from_dict(json.loads(json.dumps(p.to_dict()))) == p
    with pytest.raises(ValueError):
        SimProfile(inactive_prob=1.5)


def test_questionnaires_follow_level(cal):
    cohort = generate_cohort(default_profiles(False, 40), cal, 2)
    responses = generate_questionnaires(cohort, 2)
    scores = [score_questionnaire(r) for r in responses]
    r = kmeans_2(scores, ids=[x.student_id for x in responses])
    truth = {sid: SrlLevel(v["profile"]["srl_level"]) for sid, v in cohort.ground_truth["students"].items()}
    agree = sum(a.cluster is truth[a.student_id] for a in r.assignments)
    assert agree >= 36


def test_scores_correlate_with_active_weeks(cal):
    cohort = generate_cohort([(300, SimProfile(inactive_prob=0.85))], cal, 9)
    scores = generate_scores(cohort, 9)
    taw = [student_features(build_daily_series(log, cal)).total_active_week for log in cohort.logs]
    r = pearson_r(taw, [scores[log.student_id] for log in cohort.logs])
    assert 0.3 < r.statistic < 0.6


def test_simulate_study_layout(tmp_path, cal):
    simulate_study(tmp_path, 5, cal, n_per_cohort=8)
    for name, prefix in (("control", "c"), ("intervention", "i")):
        d = tmp_path / name
        assert sorted(p.name for p in (d / "logs").iterdir()) == [f"{prefix}{i:03d}.csv" for i in range(8)]
        assert (d / "srl.csv").exists() and (d / "scores.csv").exists() and (d / "ground_truth.json").exists()
    study = load_study(tmp_path)
    assert study.calendar == cal
    truth = json.loads((tmp_path / "control" / "ground_truth.json").read_text())["students"]
    for sid, s in study.control.series.items():
        np.testing.assert_array_equal(s.chars, truth[sid]["chars_per_day"])
    log = parse_revision_log((tmp_path / "control" / "logs" / "c000.csv").read_bytes(), "c000")
    assert log.events == study.control.logs["c000"].events


def test_sunday_profile_peaks_on_sunday(cal):
    from writetrace.features import cohort_daily_average
    from writetrace.timeseries import decompose_series

    cohort = generate_cohort([(40, SimProfile(WeeklyPattern.UNIMODAL_SUNDAY))], cal, 12)
    avg = cohort_daily_average([build_daily_series(log, cal) for log in cohort.logs])
    assert decompose_series(avg).peak_weekday() == "Sun"


def test_weekday_mass_matches_pattern_weights(cal):
    p = SimProfile(WeeklyPattern.BIMODAL_WED_SAT, inactive_prob=0.5)
    per_student = []
    for seed in range(100):
        cohort = generate_cohort([(4, p)], cal, 500 + seed, deletion_fraction=0.0)
        for rec in cohort.ground_truth["students"].values():
            per_student.append(np.asarray(rec["chars_per_day"], dtype=float).reshape(10, 7).sum(axis=0))
    per_student = np.array(per_student)
    mean = per_student.mean(axis=0)
    se = per_student.std(axis=0, ddof=1) / np.sqrt(len(per_student))
    expected = 10 * (1 - p.inactive_prob) * np.exp(p.mu + p.sigma ** 2 / 2) * PATTERN_WEIGHTS[p.weekly_pattern]
    assert np.all(np.abs(mean - expected) <= 3 * se)


def test_null_p_values_uniform(cal):
    from writetrace.report import CohortData, CohortStudy, cohort_from_logs, within_cohort_comparison

    ps = []
    for seed in range(200):
        cohort = generate_cohort(default_profiles(False, 40), cal, 20_000 + seed, name="control")
        study = CohortStudy(cal, cohort_from_logs("control", cohort.logs, cal), CohortData("intervention", {}))
        ps.append(within_cohort_comparison(study, "control").p_two_tailed)
    ps = np.sort(ps)
    n = len(ps)
    d = max(np.max(np.arange(1, n + 1) / n - ps), np.max(ps - np.arange(n) / n))
    assert d < 1.6276 / np.sqrt(n)  # one-sample KS critical value at alpha = .01
