"""Kaplan-Meier estimator against direct product-limit evaluation."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtbench.analytics import km_estimate
from oracles import product_limit


def test_no_censoring_steps():
    curve = km_estimate([(1, True), (2, True), (3, True), (4, True)])
    assert curve.survival == pytest.approx([0.75, 0.50, 0.25, 0.0])
    assert curve.at_risk == [4, 3, 2, 1]
    assert curve.events == [1, 1, 1, 1]


def test_censored_observation_reduces_at_risk():
    curve = km_estimate([(2, True), (4, False), (6, True)])
    assert curve.survival_at(2) == pytest.approx(2 / 3)
    assert curve.survival_at(6) == pytest.approx(0.0)
    assert curve.times == [2.0, 6.0]
    assert curve.at_risk == [3, 1]


def test_all_censored_is_flat_one():
    curve = km_estimate([(60.0, False)] * 10)
    assert curve.times == []
    for t in (0, 1, 30, 59, 60, 1000):
        assert curve.survival_at(t) == 1.0
    assert curve.n_censored == 10


def test_empty_input_is_argument_error():
    with pytest.raises(ValueError):
        km_estimate([])


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        km_estimate([(-1.0, True)])


def test_matches_product_limit_oracle_sampled():
    rng = random.Random(11)
    for _ in range(400):
        n = rng.randint(1, 8)
        observations = [(float(rng.randint(1, 6)), rng.random() < 0.6) for _ in range(n)]
        curve = km_estimate(observations)
        oracle = product_limit(observations)
        assert len(curve.times) == len(oracle)
        for t, s in zip(curve.times, curve.survival):
            assert abs(s - oracle[t]) < 1e-12


def test_exhaustive_small_cases_sample():
    """Every multiset of up to 3 observations over times {1,2,3} x both flags."""
    options = [(float(t), obs) for t in (1, 2, 3) for obs in (True, False)]
    for size in (1, 2, 3):
        for observations in itertools.combinations_with_replacement(options, size):
            curve = km_estimate(list(observations))
            oracle = product_limit(list(observations))
            assert [round(s, 12) for s in curve.survival] == \
                   [round(oracle[t], 12) for t in curve.times]


def test_band_contains_estimate_and_is_clipped():
    rng = random.Random(3)
    for _ in range(200):
        observations = [(float(rng.randint(1, 9)), rng.random() < 0.5)
                        for _ in range(rng.randint(1, 12))]
        curve = km_estimate(observations)
        for s, lo, hi in zip(curve.survival, curve.ci_lower, curve.ci_upper):
            assert 0.0 <= lo <= s <= hi <= 1.0


def test_late_censoring_monotonicity():
    """A censored observation beyond every event adds no steps, changes no
    d_i, raises every at-risk count by one, and can only raise S."""
    rng = random.Random(7)
    for _ in range(100):
        observations = [(float(rng.randint(1, 5)), rng.random() < 0.7)
                        for _ in range(rng.randint(1, 8))]
        base = km_estimate(observations)
        latest = max(t for t, _ in observations)
        extended = km_estimate(observations + [(latest + 3.0, False)])
        assert extended.times == base.times
        assert extended.events == base.events
        assert extended.at_risk == [n + 1 for n in base.at_risk]
        for a, b in zip(base.survival, extended.survival):
            assert b >= a - 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.floats(min_value=0, max_value=100, allow_nan=False),
                          st.booleans()), min_size=1, max_size=20))
def test_survival_monotone_and_bounded(observations):
    curve = km_estimate(observations)
    previous = 1.0
    for s in curve.survival:
        assert 0.0 <= s <= previous + 1e-15
        previous = s


def test_variance_zero_before_first_event():
    curve = km_estimate([(5, True), (7, True)])
    assert curve.survival_at(4.9) == 1.0
    assert math.isfinite(curve.variance[0])
