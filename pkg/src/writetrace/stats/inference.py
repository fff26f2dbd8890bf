"""Rank tests, correlation, t-test and chi-square with two-tailed p-values and effect sizes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import (
    AllZeroDifferences,
    DegenerateVariance,
    EmptySample,
    TooFewPairs,
    ZeroMarginal,
    ZeroVariance,
)
from .distributions import chi2_sf, norm_two_tailed, t_two_tailed


@dataclass(frozen=True)
class SummaryStats:
    n: int
    median: float
    iqr: float
    mean: float
    sd: float
    inactive_days: int = 0
    sd_defined: bool = True


@dataclass
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    test_name: str
    statistic: float
    p_two_tailed: float
    z_value: float | None = None
    effect_size_r: float | None = None
    df: float | None = None
    group_summaries: dict[str, SummaryStats] = field(default_factory=dict)
    note: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_two_tailed <= 1.0:
            raise ValueError(f"p-value {self.p_two_tailed} outside [0, 1]")

    @property
    def stars(self) -> str:
        return significance_stars(self.p_two_tailed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stars"] = self.stars
        return d


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def summarize(sample) -> SummaryStats:
    """Median and IQR (linear-interpolation quantiles), mean and n-1 standard deviation.

    A single observation has no sample deviation; sd is reported as 0 with
    ``sd_defined=False``.
    """
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptySample("cannot summarize an empty sample")
    xs = np.sort(x)
    q1, med, q3 = (_quantile_sorted(xs, q) for q in (0.25, 0.5, 0.75))
    n = x.size
    mean = float(xs.sum()) / n
    sd_defined = n > 1
    return SummaryStats(
        n=int(n),
        median=med,
        iqr=q3 - q1,
        mean=mean,
        sd=math.sqrt(float(((xs - mean) ** 2).sum()) / (n - 1)) if sd_defined else 0.0,
        inactive_days=int(np.count_nonzero(x == 0)),
        sd_defined=sd_defined,
    )


def _quantile_sorted(xs: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile of an already sorted sample (numpy's default method)."""
    pos = q * (len(xs) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(xs) - 1)
    return float(xs[lo] + (xs[hi] - xs[lo]) * (pos - lo))


def rankdata(x) -> np.ndarray:
    """1-based ranks with ties given their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    ranks = np.empty(len(x))
    i = 0
    n = len(x)
    while i < n:
        j = i
        while j + 1 < n and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _tie_sizes(x) -> np.ndarray:
    _, counts = np.unique(np.asarray(x, dtype=float), return_counts=True)
    return counts[counts > 1]


def _z_from_min(stat: float, mean: float, sd: float, continuity: bool) -> float:
    if sd == 0:
        return 0.0
    diff = stat - mean
    if continuity:
        diff = min(0.0, diff + 0.5)
    return diff / sd


def effect_size_r(z: float, n_total: int) -> float:
    """|Z| / sqrt(N) with N the number of observations across both samples."""
    return abs(z) / math.sqrt(n_total)


def wilcoxon_signed_rank(
    x,
    y,
    *,
    n_x: int | None = None,
    n_y: int | None = None,
    zero_method: str = "wilcox",
    continuity: bool = True,
    min_pairs: int = 5,
) -> TestResult:
    """Related-samples signed-rank test on d = y - x with a normal approximation.

    W = min(W+, W-). Zero differences are dropped (``zero_method="wilcox"``) or
    ranked and then discarded (``"pratt"``). The effect size divides |Z| by
    the square root of ``n_x + n_y``, which default to the sample lengths.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("paired samples must have equal length")
    d = y - x
    nonzero = d != 0
    m = int(nonzero.sum())
    if m == 0:
        raise AllZeroDifferences("all paired differences are zero")
    if m < min_pairs:
        raise TooFewPairs(f"{m} non-zero pairs; need at least {min_pairs}")

    if zero_method == "wilcox":
        r = rankdata(np.abs(d[nonzero]))
        signs = np.sign(d[nonzero])
        nz = 0
        n_ranked = m
        ties = _tie_sizes(np.abs(d[nonzero]))
    elif zero_method == "pratt":
        r_all = rankdata(np.abs(d))
        r = r_all[nonzero]
        signs = np.sign(d[nonzero])
        nz = len(d) - m
        n_ranked = len(d)
        ties = _tie_sizes(np.abs(d))
    else:
        raise ValueError(f"unknown zero_method {zero_method!r}")

    w_plus = float(r[signs > 0].sum())
    w_minus = float(r[signs < 0].sum())
    w = min(w_plus, w_minus)
    mean = (n_ranked * (n_ranked + 1) - nz * (nz + 1)) / 4.0
    var = (n_ranked * (n_ranked + 1) * (2 * n_ranked + 1) - nz * (nz + 1) * (2 * nz + 1)) / 24.0
    var -= float(np.sum(ties ** 3 - ties)) / 48.0
    z = _z_from_min(w, mean, math.sqrt(max(var, 0.0)), continuity)
    n_tot = (n_x if n_x is not None else len(x)) + (n_y if n_y is not None else len(y))
    return TestResult(
        test_name="wilcoxon_signed_rank",
        statistic=w,
        z_value=z,
        p_two_tailed=norm_two_tailed(z),
        effect_size_r=min(1.0, effect_size_r(z, n_tot)),
        group_summaries={"x": summarize(x), "y": summarize(y)},
    )


def mann_whitney_u(a, b, *, continuity: bool = True, min_n: int = 3) -> TestResult:
    """Mann-Whitney U with tie-corrected normal approximation; U = min(U_a, U_b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise EmptySample("both samples must be non-empty")
    if len(a) < min_n or len(b) < min_n:
        raise EmptySample(f"each sample needs at least {min_n} observations")
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u_a = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0
    u_b = n1 * n2 - u_a
    ties = _tie_sizes(pooled)
    result = mann_whitney_from_u(min(u_a, u_b), n1, n2, tie_term=float(np.sum(ties ** 3 - ties)),
                                 continuity=continuity)
    result.group_summaries = {"a": summarize(a), "b": summarize(b)}
    return result


def mann_whitney_from_u(u: float, n1: int, n2: int, *, tie_term: float = 0.0,
                        continuity: bool = True) -> TestResult:
    """Normal approximation for a reported U statistic.

    ``tie_term`` is the sum of t^3 - t over tie groups in the pooled sample
    (0 for tie-free data).
    """
    n = n1 + n2
    mean = n1 * n2 / 2.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    u = min(u, n1 * n2 - u)
    z = _z_from_min(u, mean, math.sqrt(max(var, 0.0)), continuity)
    return TestResult(
        test_name="mann_whitney_u",
        statistic=float(u),
        z_value=z,
        p_two_tailed=norm_two_tailed(z),
        effect_size_r=min(1.0, effect_size_r(z, n)),
    )


def p_from_z(z: float) -> float:
    return norm_two_tailed(z)


def pearson_p(r: float, n: int) -> tuple[float, float]:
    """(t, two-tailed p) for a sample correlation r on n pairs."""
    if abs(r) >= 1.0:
        return math.copysign(math.inf, r), 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t, t_two_tailed(t, n - 2)


def pearson_r(x, y) -> TestResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("samples must have equal length")
    n = len(x)
    if n < 3:
        raise EmptySample("correlation needs at least 3 pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("a variable has zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    _, p = pearson_p(r, n)
    return TestResult(test_name="pearson_r", statistic=r, p_two_tailed=p, df=n - 2,
                      group_summaries={"x": summarize(x), "y": summarize(y)})


def independent_t_test(a, b) -> TestResult:
    """Student's two-sample t-test with pooled variance."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise EmptySample("each sample needs at least 2 observations")
    df = n1 + n2 - 2
    pooled = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / df
    if pooled == 0:
        raise DegenerateVariance("both samples have zero variance")
    t = float((a.mean() - b.mean()) / math.sqrt(pooled * (1.0 / n1 + 1.0 / n2)))
    return TestResult(test_name="independent_t_test", statistic=t, p_two_tailed=t_two_tailed(t, df), df=df,
                      group_summaries={"a": summarize(a), "b": summarize(b)})


def t_test_from_moments(m1: float, s1: float, n1: int, m2: float, s2: float, n2: int) -> TestResult:
    """Pooled-variance t from group means, standard deviations and sizes."""
    df = n1 + n2 - 2
    pooled = ((n1 - 1) * s1 ** 2 + (n2 - 1) * s2 ** 2) / df
    if pooled == 0:
        raise DegenerateVariance("both samples have zero variance")
    t = (m1 - m2) / math.sqrt(pooled * (1.0 / n1 + 1.0 / n2))
    return TestResult(test_name="independent_t_test", statistic=t, p_two_tailed=t_two_tailed(t, df), df=df)


def chi_square_independence(table) -> TestResult:
    """Pearson chi-square on an r x c contingency table, no continuity correction."""
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or min(obs.shape) < 2:
        raise ValueError("need an r x c table with r, c >= 2")
    if np.any(obs < 0):
        raise ValueError("counts must be non-negative")
    rows = obs.sum(axis=1)
    cols = obs.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise ZeroMarginal("every row and column total must be positive")
    expected = np.outer(rows, cols) / obs.sum()
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return TestResult(test_name="chi_square_independence", statistic=chi2, p_two_tailed=min(1.0, chi2_sf(chi2, df)),
                      df=df)


def normality_flags(sample, skew_limit: float = 2.0, kurtosis_limit: float = 7.0) -> dict:
    """Rough non-normality screen from sample skewness and (non-excess) kurtosis."""
    x = np.asarray(sample, dtype=float)
    dev = x - x.mean()
    m2 = float(np.mean(dev ** 2))
    if m2 == 0:
        return {"skewness": 0.0, "kurtosis": 0.0, "non_normal": True}
    skew = float(np.mean(dev ** 3)) / m2 ** 1.5
    kurt = float(np.mean(dev ** 4)) / m2 ** 2
    return {"skewness": skew, "kurtosis": kurt, "non_normal": abs(skew) > skew_limit or kurt > kurtosis_limit}
