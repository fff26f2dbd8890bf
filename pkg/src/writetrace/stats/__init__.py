from .distributions import (
    betainc,
    chi2_cdf,
    chi2_sf,
    gammainc_lower,
    gammainc_upper,
    norm_cdf,
    norm_sf,
    norm_two_tailed,
    t_cdf,
    t_sf,
    t_two_tailed,
)
from .inference import (
    SummaryStats,
    TestResult,
    chi_square_independence,
    effect_size_r,
    independent_t_test,
    mann_whitney_from_u,
    mann_whitney_u,
    normality_flags,
    p_from_z,
    pearson_p,
    pearson_r,
    rankdata,
    significance_stars,
    summarize,
    t_test_from_moments,
    wilcoxon_signed_rank,
)

__all__ = [
    "betainc",
    "chi2_cdf",
    "chi2_sf",
    "gammainc_lower",
    "gammainc_upper",
    "norm_cdf",
    "norm_sf",
    "norm_two_tailed",
    "t_cdf",
    "t_sf",
    "t_two_tailed",
    "SummaryStats",
    "TestResult",
    "chi_square_independence",
    "effect_size_r",
    "independent_t_test",
    "mann_whitney_from_u",
    "mann_whitney_u",
    "normality_flags",
    "p_from_z",
    "pearson_p",
    "pearson_r",
    "rankdata",
    "significance_stars",
    "summarize",
    "t_test_from_moments",
    "wilcoxon_signed_rank",
]
