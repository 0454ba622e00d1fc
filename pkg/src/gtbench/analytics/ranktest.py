"""Two-sided Mann-Whitney U test for fuzzer-pair significance.

Bug-count samples from independent fuzzers come with no distributional
assumptions, so comparisons use ranks.  For small tie-free samples
(n1 + n2 <= 14) the p-value is exact, computed by enumerating every way the
combined ranks could split between the two samples; otherwise the normal
approximation applies, with tie correction and a continuity correction.

Identical sample multisets are flagged explicitly: "no difference at all" is
rendered differently from "no significant difference" (the white cells of a
significance matrix).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, groupby
from typing import Sequence

#: Combined sample size at or below which the tie-free test is exact.
EXACT_LIMIT = 14

#: Conventional significance threshold.
SIGNIFICANCE_LEVEL = 0.05

METHOD_EXACT = "exact"
METHOD_NORMAL = "normal_approx"


@dataclass(frozen=True)
class RankTestResult:
    u: float  # U statistic of the first sample
    p_value: float
    method: str  # METHOD_EXACT or METHOD_NORMAL
    tie_corrected: bool
    identical: bool  # samples are the same multiset (rendered as white cells)
    n1: int
    n2: int

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE_LEVEL

    def to_json(self) -> dict:
        return {
            "u": self.u,
            "p_value": self.p_value,
            "method": self.method,
            "tie_corrected": self.tie_corrected,
            "identical": self.identical,
            "significant": self.significant,
        }


def _u_statistic(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """U of sample_a: pairs with a > b, ties counting one half."""
    u = 0.0
    for a in sample_a:
        for b in sample_b:
            if a > b:
                u += 1.0
            elif a == b:
                u += 0.5
    return u


def _exact_two_sided_p(u: float, n1: int, n2: int) -> float:
    """Exact two-sided tail probability by enumerating all rank splits.

    Tie-free samples make U a pure function of which ranks sample_a holds,
    so iterating over all C(n1+n2, n1) subsets of rank positions enumerates
    the full null distribution.
    """
    total_n = n1 + n2
    u_min = min(u, n1 * n2 - u)
    u_max = n1 * n2 - u_min
    count = 0
    splits = 0
    offset = n1 * (n1 + 1) / 2
    for ranks in combinations(range(1, total_n + 1), n1):
        u_split = sum(ranks) - offset
        if u_split <= u_min or u_split >= u_max:
            count += 1
        splits += 1
    return count / splits


def mwu_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> RankTestResult:
    """Two-sided Mann-Whitney U comparison of two independent samples."""
    if not sample_a or not sample_b:
        raise ValueError("both samples must be nonempty")
    n1, n2 = len(sample_a), len(sample_b)
    u = _u_statistic(sample_a, sample_b)
    identical = sorted(sample_a) == sorted(sample_b)

    combined = sorted(sample_a) + sorted(sample_b)
    has_ties = len(set(combined)) < len(combined)

    if not has_ties and n1 + n2 <= EXACT_LIMIT:
        p = _exact_two_sided_p(u, n1, n2)
        return RankTestResult(u, p, METHOD_EXACT, tie_corrected=False,
                              identical=identical, n1=n1, n2=n2)

    total_n = n1 + n2
    tie_term = sum(t ** 3 - t for t in (len(list(g)) for _, g in groupby(sorted(combined))))
    if total_n > 1:
        sigma_sq = n1 * n2 / 12.0 * ((total_n + 1) - tie_term / (total_n * (total_n - 1)))
    else:
        sigma_sq = 0.0
    mu = n1 * n2 / 2.0
    if sigma_sq <= 0:
        # Every value tied: ranks carry no information, no evidence of difference.
        p = 1.0
    else:
        z = (abs(u - mu) - 0.5) / math.sqrt(sigma_sq)  # continuity-corrected
        z = max(z, 0.0)
        p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return RankTestResult(u, p, METHOD_NORMAL, tie_corrected=has_ties,
                          identical=identical, n1=n1, n2=n2)
