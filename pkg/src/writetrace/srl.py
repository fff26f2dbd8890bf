"""SRL questionnaire scoring, reliability and two-cluster k-means grouping."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import AllPointsIdentical, DegenerateVariance, MalformedRow, MissingColumn, OutOfScaleItem, TooFewPoints
from .stats import TestResult, chi_square_independence

N_ITEMS = 25
# 1-based inclusive item ranges per dimension
DIMENSIONS = {
    "goal_setting": (1, 4),
    "persistence": (5, 14),
    "effort": (15, 16),
    "self_efficacy": (17, 25),
}
DIMENSION_CODES = {"goal_setting": "gs", "persistence": "p", "effort": "e", "self_efficacy": "se"}


@dataclass(frozen=True)
class SrlResponse:
    student_id: str
    item_scores: tuple[int, ...]

    def __post_init__(self):
        if len(self.item_scores) != N_ITEMS:
            raise ValueError(f"expected {N_ITEMS} items, got {len(self.item_scores)}")


@dataclass(frozen=True)
class SrlScores:
    goal_setting: float
    persistence: float
    effort: float
    self_efficacy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.goal_setting, self.persistence, self.effort, self.self_efficacy])


def score_questionnaire(resp: SrlResponse, scale: tuple[int, int] = (1, 5)) -> SrlScores:
    lo, hi = scale
    for i, v in enumerate(resp.item_scores, start=1):
        if not lo <= v <= hi:
            raise OutOfScaleItem(i, v, scale)
    items = np.asarray(resp.item_scores, dtype=float)
    return SrlScores(**{name: float(items[a - 1:b].mean()) for name, (a, b) in DIMENSIONS.items()})


def parse_questionnaire_csv(text: str, scale: tuple[int, int] = (1, 5)) -> list[SrlResponse]:
    """Read ``student_id,q1..q25`` rows. Extra item columns are rejected."""
    reader = csv.reader(io.StringIO(text))
    header = [h.strip().lower() for h in next(reader)]
    if "student_id" not in header:
        raise MissingColumn("student_id")
    item_cols = [h for h in header if h.startswith("q") and h[1:].isdigit()]
    expected = [f"q{i}" for i in range(1, N_ITEMS + 1)]
    for name in expected:
        if name not in header:
            raise MissingColumn(name)
    if len(item_cols) != N_ITEMS:
        extra = sorted(set(item_cols) - set(expected))
        raise MalformedRow(1, f"unexpected item columns {extra}")
    sid_pos = header.index("student_id")
    pos = [header.index(name) for name in expected]
    out = []
    for row in reader:
        if not row:
            continue
        try:
            items = tuple(int(row[p]) for p in pos)
        except (ValueError, IndexError):
            raise MalformedRow(reader.line_num, "non-integer or missing item") from None
        resp = SrlResponse(row[sid_pos], items)
        score_questionnaire(resp, scale)  # scale check
        out.append(resp)
    return out


def cronbach_alpha(item_matrix) -> float:
    """Internal-consistency reliability of a students x items matrix (n - 1 variances)."""
    m = np.asarray(item_matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError("need at least 2 students and 2 items")
    k = m.shape[1]
    total_var = m.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise DegenerateVariance("row sums have zero variance")
    return k / (k - 1) * (1.0 - m.var(axis=0, ddof=1).sum() / total_var)


def dimension_alphas(responses: Sequence[SrlResponse]) -> dict[str, float]:
    items = np.array([r.item_scores for r in responses], dtype=float)
    return {name: cronbach_alpha(items[:, a - 1:b]) for name, (a, b) in DIMENSIONS.items()}


class SrlLevel(str, Enum):
    HIGH = "HighSRL"
    LOW = "LowSRL"


@dataclass(frozen=True)
class ClusterAssignment:
    student_id: str
    cluster: SrlLevel
    centroid_distance: float


@dataclass
class ClusteringResult:
    assignments: list[ClusterAssignment]
    labels: np.ndarray  # 0/1 partition in input order
    centroids: np.ndarray  # in clustering space
    sse: float
    avg_within_centroid_distance: float
    n_iter: int
    restart: int

    def by_level(self, level: SrlLevel) -> list[str]:
        return [a.student_id for a in self.assignments if a.cluster is level]


def _kmeanspp_init(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    first = x[rng.integers(len(x))]
    d2 = ((x - first) ** 2).sum(axis=1)
    second = x[rng.choice(len(x), p=d2 / d2.sum())]
    return np.vstack([first, second])


def _principal_split(x: np.ndarray) -> np.ndarray:
    """Best threshold split of the points ordered along their first principal axis."""
    c = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    order = np.argsort(c @ vt[0], kind="mergesort")
    xs = x[order]
    n = len(x)
    cum = np.cumsum(xs, axis=0)
    cum_sq = np.cumsum((xs ** 2).sum(axis=1))
    k = np.arange(1, n)
    left = cum_sq[:-1] - (cum[:-1] ** 2).sum(axis=1) / k
    right = (cum_sq[-1] - cum_sq[:-1]) - ((cum[-1] - cum[:-1]) ** 2).sum(axis=1) / (n - k)
    cut = int(np.argmin(left + right)) + 1
    labels = np.zeros(n, dtype=int)
    labels[order[cut:]] = 1
    return labels


def _lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray, int]:
    labels = None
    for it in range(1, max_iter + 1):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            return labels, centers, it
        labels = new
        for c in range(2):
            members = x[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
            else:
                # empty cluster: move it to the point worst served by the other centre
                far = int(np.argmax(dist[np.arange(len(x)), labels]))
                centers[c] = x[far]
    return labels, centers, max_iter


def _hartigan(x: np.ndarray, labels: np.ndarray, max_iter: int) -> np.ndarray:
    """Hartigan-style single-point transfers that lower SSE, until none does."""
    labels = labels.copy()
    for _ in range(max_iter):
        moved = False
        for i in range(len(x)):
            src = labels[i]
            n_src = int(np.sum(labels == src))
            if n_src == 1:
                continue
            dst = 1 - src
            n_dst = int(np.sum(labels == dst))
            c_src = x[labels == src].mean(axis=0)
            d_src = ((x[i] - c_src) ** 2).sum() * n_src / (n_src - 1)
            if n_dst == 0:
                gain = d_src
            else:
                c_dst = x[labels == dst].mean(axis=0)
                gain = d_src - ((x[i] - c_dst) ** 2).sum() * n_dst / (n_dst + 1)
            if gain > 1e-12:
                labels[i] = dst
                moved = True
        if not moved:
            break
    return labels


def _sse(x: np.ndarray, labels: np.ndarray) -> float:
    return float(sum(((x[labels == c] - x[labels == c].mean(axis=0)) ** 2).sum() for c in (0, 1) if np.any(labels == c)))


def standardize(points: np.ndarray) -> np.ndarray:
    """Per-column z-scores (population sd); constant columns are only centred."""
    sd = points.std(axis=0)
    sd[sd == 0] = 1.0
    return (points - points.mean(axis=0)) / sd


def kmeans_2(points, seed: int = 0, *, ids: Sequence[str] | None = None, standardized: bool = True,
             restarts: int = 10, max_iter: int = 300, refine: bool = True,
             principal_start: bool = True) -> ClusteringResult:
    """Split students into high and low SRL clusters.

    k-means++ seeding, Lloyd iterations to an assignment fixpoint, then
    single-point transfers while they lower SSE (``refine``); best SSE over
    ``restarts`` seeded runs (earliest restart wins ties). With
    ``principal_start`` one extra run, reported as restart ``restarts``,
    starts from the best split along the first principal axis. The cluster
    whose members have the larger mean of dimension scores is labelled high.
    The reported average centroid distance is the mean Euclidean distance of
    each student to their own centroid in clustering space, non-negative.
    """
    raw = np.asarray([p.as_array() if isinstance(p, SrlScores) else p for p in points], dtype=float)
    if raw.ndim != 2 or len(raw) < 2:
        raise TooFewPoints("k-means with k=2 needs at least 2 points")
    if np.all(raw == raw[0]):
        raise AllPointsIdentical("all points are identical")
    ids = list(ids) if ids is not None else [str(i) for i in range(len(raw))]
    x = standardize(raw) if standardized else raw.copy()

    best = None
    for r in range(restarts + int(principal_start)):
        if r < restarts:
            init = _kmeanspp_init(x, np.random.default_rng([seed, r]))
        else:
            split = _principal_split(x)
            init = np.vstack([x[split == c].mean(axis=0) for c in (0, 1)])
        labels, centers, n_iter = _lloyd(x, init, max_iter)
        if refine:
            labels = _hartigan(x, labels, max_iter)
            centers = np.vstack([x[labels == c].mean(axis=0) for c in (0, 1)])
        sse = _sse(x, labels)
        if best is None or sse < best[0] - 1e-12:
            best = (sse, labels.copy(), centers.copy(), n_iter, r)
    sse, labels, centers, n_iter, restart = best

    means = [raw[labels == c].mean() if np.any(labels == c) else -np.inf for c in (0, 1)]
    high = int(np.argmax(means))
    dist = np.sqrt(((x - centers[labels]) ** 2).sum(axis=1))
    assignments = [
        ClusterAssignment(sid, SrlLevel.HIGH if lab == high else SrlLevel.LOW, float(dd))
        for sid, lab, dd in zip(ids, labels, dist)
    ]
    return ClusteringResult(assignments, labels, centers, sse, float(dist.mean()), n_iter, restart)


def cluster_proportion_test(control: Sequence[ClusterAssignment],
                            intervention: Sequence[ClusterAssignment]) -> TestResult:
    """Chi-square on the cohort x SRL-level contingency table."""
    if not control or not intervention:
        raise TooFewPoints("both cohorts need cluster assignments")

    def row(group):
        return [sum(a.cluster is SrlLevel.HIGH for a in group), sum(a.cluster is SrlLevel.LOW for a in group)]

    return chi_square_independence([row(control), row(intervention)])


def clusters_to_csv(result: ClusteringResult, scores: Sequence[SrlScores]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["student_id", "cluster", "gs", "p", "e", "se"])
    for a, s in zip(result.assignments, scores):
        w.writerow([a.student_id, a.cluster.value, *(repr(getattr(s, n)) for n in DIMENSION_CODES)])
    return buf.getvalue()


def clusters_from_csv(text: str) -> dict[str, SrlLevel]:
    return {row["student_id"]: SrlLevel(row["cluster"]) for row in csv.DictReader(io.StringIO(text))}
