"""Interval-union algebra and the almost-everywhere zero test."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opkernel.domain_sets import (AeTolerance, LebesgueSet, OrderedPartition, ae_zero,
                                  intersect, measure, set_minus, union)

ends = st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 3))
pairs = st.lists(st.tuples(ends, ends), max_size=5)


def _set(ps):
    return LebesgueSet([(min(a, b), max(a, b)) for a, b in ps])


def test_interval_measure_and_membership():
    s = LebesgueSet.interval(0, 2)
    assert s.measure() == 2.0
    assert 1.0 in s and 3.0 not in s


def test_overlapping_intervals_merge():
    s = LebesgueSet([(0, 1), (0.5, 2), (3, 4)])
    assert s.intervals == ((0.0, 2.0), (3.0, 4.0))
    assert s.measure() == 3.0


def test_degenerate_intervals_dropped():
    assert LebesgueSet([(1, 1)]).is_empty


def test_set_minus_example():
    s = set_minus(LebesgueSet.interval(0, 3), LebesgueSet.interval(1, 2))
    assert s.measure() == pytest.approx(2.0)
    assert s.intervals == ((0.0, 1.0), (2.0, 3.0))


def test_json_sentinels():
    s = LebesgueSet.from_json([["-inf", 0], [1, "inf"]])
    assert not s.is_bounded
    assert math.isinf(s.measure())
    assert s.truncate(-5, 5).measure() == pytest.approx(9.0)


def test_json_round_trip():
    s = LebesgueSet([(0, 1), (2, 3.5)])
    assert LebesgueSet.from_json(s.to_json()) == s


def test_malformed_json_rejected():
    with pytest.raises(ValueError):
        LebesgueSet.from_json([[0]])


@given(pairs, pairs)
def test_measure_additivity(p1, p2):
    s1, s2 = _set(p1), _set(p2)
    total = measure(intersect(s1, s2)) + measure(set_minus(s1, s2))
    assert total == pytest.approx(measure(s1), abs=1e-9)


@given(pairs, pairs)
def test_union_inclusion_exclusion(p1, p2):
    s1, s2 = _set(p1), _set(p2)
    lhs = measure(union(s1, s2)) + measure(intersect(s1, s2))
    assert lhs == pytest.approx(measure(s1) + measure(s2), abs=1e-9)


@given(pairs, pairs, st.integers(0, 2**32 - 1))
def test_pointwise_consistency(p1, p2, seed):
    s1, s2 = _set(p1), _set(p2)
    x = np.random.default_rng(seed).uniform(-11, 11, 10_000)
    edges = np.array(s1.endpoints() + s2.endpoints() + [0.0])
    x = x[np.min(np.abs(x[:, None] - edges[None, :]), axis=1) > 1e-9]
    a, b = s1.contains(x), s2.contains(x)
    assert np.array_equal(intersect(s1, s2).contains(x), a & b)
    assert np.array_equal(set_minus(s1, s2).contains(x), a & ~b)
    assert np.array_equal(union(s1, s2).contains(x), a | b)


def test_partition_refinement():
    p = OrderedPartition.from_breakpoints([0, 0.5, 1])
    q = OrderedPartition.from_breakpoints([0, 0.25, 1])
    r = p.common_refinement(q)
    assert len(r) == 3


def test_ae_zero_ignores_small_measure():
    w = np.full(1000, 1e-3)
    v = np.zeros(1000)
    v[0] = 5.0
    tol = AeTolerance(1e-9, 1e-9, 2e-3)
    assert ae_zero(v, tol, weights=w).is_ae_zero
    v[:5] = 5.0
    verdict = ae_zero(v, tol, weights=w)
    assert not verdict.is_ae_zero
    assert verdict.violation_measure == pytest.approx(5e-3)


@given(st.floats(1e-12, 1e-3), st.floats(1e-12, 1e-3), st.floats(0, 1e-2),
       st.integers(0, 1000))
def test_ae_zero_monotone(ev, em, bump, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=200) * rng.choice([0, 1e-10, 1e-4], size=200)
    w = np.full(200, 1 / 200)
    tol = AeTolerance(ev, 1e-15, em)
    if ae_zero(v, tol, weights=w, scale=1.0).is_ae_zero:
        wider = AeTolerance(ev + bump, 1e-15, em + bump)
        assert ae_zero(v, wider, weights=w, scale=1.0).is_ae_zero


def test_tolerance_rejects_negative():
    with pytest.raises(ValueError):
        AeTolerance(-1.0, 0.0, 0.0)
