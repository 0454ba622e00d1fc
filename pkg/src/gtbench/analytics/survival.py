"""Kaplan-Meier product-limit estimation of bug survival.

The survival function S(t) is the probability that a bug remains
undiscovered at time t, estimated over repeated trials as

    S(t) = prod_{i: t_i <= t} (1 - d_i / n_i)

where d_i is the number of trials discovering the bug at event time t_i and
n_i the number still at risk.  Right-censored observations (the bug had not
been found when the trial timed out) leave the at-risk set after their time
without contributing an event; a bug never found in any trial yields the
flat S = 1 curve.

Confidence bands use Greenwood's variance with a log-transformed interval,

    S * exp(+/- z * sqrt(sum d_j / (n_j (n_j - d_j)))),

clipped to [0, 1].
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence


@dataclass
class SurvivalCurve:
    """Step function over the distinct event times.

    Arrays are parallel: at ``times[i]`` the estimate drops to
    ``survival[i]`` with ``events[i]`` events out of ``at_risk[i]`` at risk.
    An all-censored input produces empty arrays (S identically 1).
    """

    times: list[float] = field(default_factory=list)
    at_risk: list[int] = field(default_factory=list)
    events: list[int] = field(default_factory=list)
    survival: list[float] = field(default_factory=list)
    variance: list[float] = field(default_factory=list)
    ci_lower: list[float] = field(default_factory=list)
    ci_upper: list[float] = field(default_factory=list)
    n_observations: int = 0
    n_censored: int = 0
    confidence: float = 0.95

    def survival_at(self, t: float) -> float:
        """S(t): right-continuous step evaluation; S(t) = 1 before any event."""
        idx = bisect_right(self.times, t)
        return 1.0 if idx == 0 else self.survival[idx - 1]

    def to_json(self) -> dict:
        return {
            "times": self.times,
            "at_risk": self.at_risk,
            "events": self.events,
            "survival": self.survival,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "n_observations": self.n_observations,
            "n_censored": self.n_censored,
            "confidence": self.confidence,
        }


def km_estimate(observations: Sequence[tuple[float, bool]],
                confidence: float = 0.95) -> SurvivalCurve:
    """Product-limit curve from (time, observed) pairs.

    ``observed=False`` marks a right-censored observation.  Ties between an
    event and a censoring at the same time follow the usual convention: the
    censored trial still counts as at risk for that event.
    """
    if not observations:
        raise ValueError("km_estimate requires at least one observation")
    for t, _ in observations:
        if t < 0:
            raise ValueError(f"negative observation time {t}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    n = len(observations)
    curve = SurvivalCurve(n_observations=n,
                          n_censored=sum(1 for _, obs in observations if not obs),
                          confidence=confidence)
    event_times = sorted({t for t, obs in observations if obs})
    surv = 1.0
    greenwood = 0.0  # running sum of d / (n (n - d))
    for t in event_times:
        at_risk = sum(1 for tt, _ in observations if tt >= t)
        d = sum(1 for tt, obs in observations if obs and tt == t)
        surv *= 1.0 - d / at_risk
        if at_risk > d:
            greenwood += d / (at_risk * (at_risk - d))
            half_width = math.exp(z * math.sqrt(greenwood))
            lower = max(0.0, surv / half_width)
            upper = min(1.0, surv * half_width)
            variance = surv * surv * greenwood
        else:
            # The at-risk set is exhausted: S hits 0 and the log-scale
            # variance is undefined; the band collapses onto the estimate.
            greenwood = math.inf
            lower = upper = surv = 0.0
            variance = 0.0
        curve.times.append(float(t))
        curve.at_risk.append(at_risk)
        curve.events.append(d)
        curve.survival.append(surv)
        curve.variance.append(variance)
        curve.ci_lower.append(lower)
        curve.ci_upper.append(upper)
    return curve
