import math

import numpy as np
import pytest

from cforbit.zaremba import (
    HeightBoundError,
    HeightBoundReport,
    ZarembaCensus,
    brute_force_census,
    brute_force_censuses,
    dual_closure_fraction,
    enumerate_bounded,
    exponent_fit,
    height_bound_check,
    members,
)


def test_census_validation():
    with pytest.raises(ValueError):
        ZarembaCensus(0, 10, {}, {})
    with pytest.raises(ValueError):
        ZarembaCensus(1, 1, {}, {})
    with pytest.raises(ValueError):
        ZarembaCensus(1, 10, {11: 1}, {})
    with pytest.raises(ValueError):
        ZarembaCensus(1, 10, {5: 1}, {5: 2})


def test_digit_one_chain_is_fibonacci():
    census = enumerate_bounded(50, 1)
    assert dict(census.counts) == {2: 1, 3: 1, 5: 1, 8: 1, 13: 1, 21: 1, 34: 1}
    # the canonical last digit is >= 2, so no strict level-1 members exist
    assert dict(census.strict_counts) == {}
    assert census.total() == 7
    assert census.total(10) == 4
    assert list(census.rows()) == [(q, 1, 0) for q in (2, 3, 5, 8, 13, 21, 34)]
    assert census.count(13) == 1 and census.count(14) == 0


def test_tree_walk_matches_digit_filter():
    brutes = brute_force_censuses(300, (1, 2, 3, 4, 5))
    for K in (1, 2, 3, 4, 5):
        tree = enumerate_bounded(300, K)
        assert dict(tree.counts) == dict(brutes[K].counts)
        assert dict(tree.strict_counts) == dict(brutes[K].strict_counts)
    assert dict(brute_force_census(300, 2).counts) == dict(brutes[2].counts)


def test_first_digit_branches_merge_to_the_full_census():
    full = enumerate_bounded(200, 3)
    parts = [enumerate_bounded(200, 3, first_digit=a) for a in range(1, 5)]
    merged = parts[0]
    for part in parts[1:]:
        merged = merged.merge(part)
    assert dict(merged.counts) == dict(full.counts)
    assert dict(merged.strict_counts) == dict(full.strict_counts)
    with pytest.raises(ValueError):
        full.merge(enumerate_bounded(100, 3))
    with pytest.raises(ValueError):
        enumerate_bounded(200, 3, first_digit=5)
    with pytest.raises(ValueError):
        enumerate_bounded(200, 3, first_digit=0)


def test_members_examples():
    assert list(members(8, 1)) == [5]
    assert list(members(5, 2)) == [2, 3]
    assert list(members(5, 2, strict=True)) == [2, 3]
    assert members(7, 1).size == 0
    with pytest.raises(ValueError):
        members(1, 1)
    with pytest.raises(ValueError):
        members(5, 0)


def test_exponent_fit():
    census = enumerate_bounded(4096, 2)
    assert census.total() == 8583
    assert exponent_fit(census) == 0.05991699739803159
    with pytest.raises(ValueError):
        exponent_fit(enumerate_bounded(8, 2))


def test_height_bound_reports():
    rep = height_bound_check(5, 2)
    assert isinstance(rep, HeightBoundReport)
    assert rep.checked == 2
    assert rep.bound == pytest.approx(math.sqrt(2) * 3**1.5, abs=1e-12)
    assert rep.max_height == 1.117864714040945
    assert rep.argmax_p == 2
    assert rep.argmax_t == 0.9409021641922433
    rep = height_bound_check(8, 1)
    assert (rep.checked, rep.argmax_p) == (1, 5)
    assert rep.max_height == 1.154675134680248
    assert issubclass(HeightBoundError, AssertionError)


def test_height_bound_validation():
    with pytest.raises(ValueError):
        height_bound_check(1, 1)
    with pytest.raises(ValueError):
        height_bound_check(10**6 + 1, 1)
    with pytest.raises(ValueError):
        height_bound_check(5, 2, dt=0.2)
    with pytest.raises(ValueError):
        height_bound_check(5, 2, dt=0.0)


def test_dual_closure_is_measured_not_asserted():
    assert dual_closure_fraction(89, 2) == 0.5
    assert dual_closure_fraction(100, 3) == 1.0
    # vacuous when q has no members at the bound
    assert dual_closure_fraction(7, 1) == 1.0


def test_census_members_are_consistent():
    census = enumerate_bounded(120, 2)
    for q in range(2, 121):
        assert census.count(q) == members(q, 2).size
        assert census.strict_count(q) == members(q, 2, strict=True).size
