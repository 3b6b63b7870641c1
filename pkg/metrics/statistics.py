"""Rank statistics: Wilcoxon signed-rank test and Spearman correlation."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata, spearmanr

from utils.errors import DegenerateTestError, DimensionError, SmallSampleError, UndefinedMetricError

MIN_PAIRS = 20


@dataclass
class WilcoxonResult:
    statistic: float     # min(W+, W-)
    p_value: float       # two-sided, normal approximation
    n_used: int          # pairs left after dropping zero differences
    w_plus: float
    z: float


def wilcoxon_signed_rank(a, b) -> WilcoxonResult:
    """
    Paired two-sided signed-rank test. Zero differences are dropped, tied
    |d| get midranks, and the variance is tie-corrected. Uses the normal
    approximation with continuity correction, so at least 20 pairs are required.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"paired samples differ in length: {a.size} vs {b.size}")
    if a.size < MIN_PAIRS:
        raise SmallSampleError(f"Wilcoxon normal approximation needs at least {MIN_PAIRS} pairs, got {a.size}")

    d = b - a
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateTestError("all paired differences are zero")

    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var <= 0:
        raise DegenerateTestError("signed-rank variance vanished")

    z = (abs(w_plus - mean) - 0.5) / np.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, 2.0 * float(norm.sf(z)))
    return WilcoxonResult(statistic=min(w_plus, w_minus), p_value=p, n_used=n, w_plus=w_plus, z=float(z))


def spearman_rank_correlation(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"vectors differ in length: {a.size} vs {b.size}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedMetricError("Spearman correlation of a constant vector")
    rho = spearmanr(a, b)[0]
    return float(np.clip(rho, -1.0, 1.0))
