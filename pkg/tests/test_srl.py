from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_two_partition_sse
from writetrace.errors import AllPointsIdentical, MalformedRow, MissingColumn, OutOfScaleItem, TooFewPoints
from writetrace.srl import (
    N_ITEMS,
    SrlLevel,
    SrlResponse,
    SrlScores,
    cluster_proportion_test,
    clusters_from_csv,
    clusters_to_csv,
    cronbach_alpha,
    dimension_alphas,
    kmeans_2,
    parse_questionnaire_csv,
    score_questionnaire,
    standardize,
)

HEADER = "student_id," + ",".join(f"q{i}" for i in range(1, N_ITEMS + 1))


def test_scoring_uses_dimension_item_ranges():
    items = tuple([1] * 4 + [2] * 10 + [3] * 2 + [5] * 9)
    s = score_questionnaire(SrlResponse("a", items))
    assert s == SrlScores(1.0, 2.0, 3.0, 5.0)


def test_out_of_scale_item():
    items = [3] * N_ITEMS
    items[6] = 6
    with pytest.raises(OutOfScaleItem) as exc:
        score_questionnaire(SrlResponse("a", tuple(items)))
    assert exc.value.index == 7
    assert score_questionnaire(SrlResponse("a", tuple(items)), scale=(1, 7)).persistence == pytest.approx(3.3)


def test_wrong_arity():
    with pytest.raises(ValueError):
        SrlResponse("a", (1, 2, 3))


def test_parse_questionnaire_csv():
    text = HEADER + "\ns1," + ",".join(["4"] * 25) + "\ns2," + ",".join(["2"] * 25) + "\n"
    rows = parse_questionnaire_csv(text)
    assert [r.student_id for r in rows] == ["s1", "s2"]
    with pytest.raises(MissingColumn):
        parse_questionnaire_csv("student_id,q1\ns1,3\n")
    with pytest.raises(MalformedRow):
        parse_questionnaire_csv(HEADER + ",q26\ns1," + ",".join(["4"] * 26) + "\n")
    with pytest.raises(OutOfScaleItem):
        parse_questionnaire_csv(HEADER + "\ns1," + ",".join(["9"] * 25) + "\n")


def test_cronbach_alpha_hand_value():
    assert cronbach_alpha([[2, 3, 3], [4, 4, 5], [3, 3, 4], [5, 4, 5]]) == pytest.approx(12 / 13)


def test_dimension_alphas_keys():
    rng = np.random.default_rng(0)
    base = rng.integers(1, 6, size=(30, 1))
    items = np.clip(base + rng.integers(-1, 2, size=(30, 25)), 1, 5)
    alphas = dimension_alphas([SrlResponse(str(i), tuple(int(v) for v in row)) for i, row in enumerate(items)])
    assert set(alphas) == {"goal_setting", "persistence", "effort", "self_efficacy"}
    assert all(a > 0.5 for a in alphas.values())


def test_kmeans_labels_high_cluster_by_raw_mean():
    pts = [[4.5, 4.2, 4.8, 4.4], [4.7, 4.5, 4.6, 4.9], [4.4, 4.6, 4.5, 4.5],
           [2.1, 2.5, 2.0, 2.2], [1.9, 2.2, 2.4, 2.0]]
    r = kmeans_2(pts, seed=3, ids=list("abcde"))
    assert r.by_level(SrlLevel.HIGH) == ["a", "b", "c"]
    assert r.by_level(SrlLevel.LOW) == ["d", "e"]
    assert r.avg_within_centroid_distance >= 0
    assert all(a.centroid_distance >= 0 for a in r.assignments)


def test_kmeans_deterministic():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(30, 4))
    a, b = kmeans_2(pts, seed=11), kmeans_2(pts, seed=11)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.sse == b.sse


def test_kmeans_errors():
    with pytest.raises(TooFewPoints):
        kmeans_2([[1, 2, 3, 4]])
    with pytest.raises(AllPointsIdentical):
        kmeans_2([[1, 2, 3, 4]] * 3)


def test_kmeans_two_points():
    r = kmeans_2([[1, 1, 1, 1], [5, 5, 5, 5]], standardized=False)
    assert r.sse == 0.0 and sorted(r.labels.tolist()) == [0, 1]


def _transfer_gain(x, labels, i):
    moved = labels.copy()
    moved[i] = 1 - moved[i]
    if len(set(moved.tolist())) < 2:
        return 0.0
    sse = lambda lab: sum(((x[lab == c] - x[lab == c].mean(axis=0)) ** 2).sum() for c in (0, 1))
    return sse(labels) - sse(moved)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 9))
def test_kmeans_local_optimum_and_bounded_by_brute_force(seed, n):
    # k-means is a heuristic: for arbitrary data it is guaranteed a local
    # optimum, never better than the exhaustive optimum
    rng = np.random.default_rng(seed)
    pts = rng.integers(1, 6, size=(n, 4)).astype(float) + rng.normal(0, 0.3, size=(n, 4))
    if np.all(pts == pts[0]):
        return
    r = kmeans_2(pts, seed=seed, standardized=False)
    assert r.sse >= best_two_partition_sse(pts.tolist()) - 1e-9
    assert all(_transfer_gain(pts, r.labels, i) <= 1e-9 for i in range(n))


@pytest.mark.parametrize("seed", range(25))
def test_kmeans_matches_brute_force_on_seeded_corpus(seed):
    rng = np.random.default_rng([3, seed])
    n = int(rng.integers(3, 13))
    pts = rng.integers(1, 6, size=(n, 4)).astype(float) + rng.normal(0, 0.3, size=(n, 4))
    r = kmeans_2(pts, seed=seed, standardized=False)
    assert r.sse == pytest.approx(best_two_partition_sse(pts.tolist()), rel=1e-9, abs=1e-9)


def test_principal_start_reported_as_extra_restart():
    # a case where only the principal-axis start reaches the optimum
    rng = np.random.default_rng([7, 169])
    n = int(rng.integers(2, 13))
    centers = rng.uniform(1.5, 4.5, size=(2, 4))
    pts = centers[rng.integers(0, 2, n)] + rng.normal(0, rng.uniform(0.2, 1.2), size=(n, 4))
    with_split = kmeans_2(pts, seed=169)
    without = kmeans_2(pts, seed=169, principal_start=False)
    assert with_split.restart == 10
    assert with_split.sse < without.sse
    assert with_split.sse == pytest.approx(best_two_partition_sse(standardize(pts).tolist()), rel=1e-9)


def test_standardized_clustering_space():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(10, 4)) * [1, 10, 100, 1000]
    r = kmeans_2(pts, seed=0)
    z = standardize(pts)
    assert r.sse == pytest.approx(best_two_partition_sse(z.tolist()), rel=1e-9)


def test_cluster_csv_round_trip_and_proportions():
    pts = [SrlScores(4.5, 4.4, 4.0, 4.6), SrlScores(4.2, 4.1, 4.5, 4.4), SrlScores(2.0, 2.5, 2.0, 2.2),
           SrlScores(4.8, 4.6, 4.5, 4.9), SrlScores(1.5, 2.0, 2.5, 1.8)]
    r = kmeans_2(pts, ids=["a", "b", "c", "d", "e"])
    text = clusters_to_csv(r, pts)
    assert text.splitlines()[0] == "student_id,cluster,gs,p,e,se"
    assert clusters_from_csv(text) == {a.student_id: a.cluster for a in r.assignments}
    test = cluster_proportion_test(r.assignments, r.assignments)
    assert test.statistic == pytest.approx(0.0)
