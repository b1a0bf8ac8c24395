"""Top-level acceptance gates, one test per criterion.

Each test is a single pass/fail line under -v. Exact identities allow
zero violations; statistical gates carry their stated tolerances. The
tolerances and q schedules here are frozen; loosening them to make a
line green is never acceptable.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cforbit.arith import (
    count_coprime_upto,
    euler_phi,
    factorize_with_spf,
    omega,
    smallest_prime_factors,
)
from cforbit.cfe import ReducedFraction, cfe_digits, from_digits, gauss_map
from cforbit.crosssec import (
    crossing_sequence,
    detect_crossings_numeric,
    kappa_quadrature,
    mean_return_time,
)
from cforbit.lattice import verify_symmetry
from cforbit.stats import (
    LEN_RATE,
    averaged_height_tail,
    digit_one_frequency,
    dispersion,
    haar_height_tail,
    len_stats,
    mass_escape_count,
    orbit_fd_histogram,
)
from cforbit.zaremba import brute_force_censuses, enumerate_bounded, exponent_fit, height_bound_check

Q_BIG = 10**6 + 3
Q_MID = 10**5 + 3
Q_SMALL = 10**4 + 7
Q_TINY = 10**3 + 9


def test_criterion_01_exact_identity_suite():
    start = time.perf_counter()
    # duality witness is exact for every reduced fraction
    for q in range(2, 2001):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                verify_symmetry(p, q)
    # digit words invert exactly and never exceed the binary-length ceiling
    for q in range(2, 5001):
        cap = 2 * math.log2(q)
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                x = ReducedFraction(p, q)
                w = cfe_digits(x)
                assert len(w.digits) <= cap
                assert from_digits(w) == x
    # the two-step shift agrees with the reflection on the upper half
    for q in range(3, 2001):
        for p in range(q // 2 + 1, q):
            if math.gcd(p, q) == 1:
                x = ReducedFraction(p, q)
                lhs = gauss_map(gauss_map(x))
                assert lhs == gauss_map(x.complement())
    # coprime counting stays within 2^omega of proportionality
    spf = smallest_prime_factors(10**4 + 1)
    alphas = [Fraction(k, 16) for k in range(17)]
    for q in range(2, 10**4 + 1):
        m = factorize_with_spf(q, spf)
        phi = euler_phi(m)
        slack = 2 ** omega(m)
        for a in alphas:
            assert abs(count_coprime_upto(m, a) - a * phi) <= slack
    # high-excursion counts never break the totient bound
    rng = np.random.default_rng(20250817)
    done = 0
    while done < 200:
        q = int(rng.integers(3, 10**4 + 1))
        window = math.log(q) - 2 * omega(q)
        if window <= 0:
            continue
        M = float(rng.choice((2.0, 3.0, 5.0)))
        t = float(rng.uniform(0.0, window))
        rep = mass_escape_count(q, M, t)
        assert rep.count <= rep.bound
        done += 1
    assert time.perf_counter() - start < 60.0


def test_criterion_02_kappa_constant():
    kappa = kappa_quadrature()
    assert abs(kappa - 3.0 / math.pi**2) < 1e-9
    assert abs(2.0 * math.log(2.0) * kappa - LEN_RATE) < 1e-12


def test_criterion_03_mean_length_rate_at_a_million():
    start = time.perf_counter()
    s = len_stats(Q_BIG)
    assert time.perf_counter() - start < 120.0
    ratio = float(s.mean_len) / (2.0 * math.log(Q_BIG))
    assert 0.4114 <= ratio <= 0.4314


def test_criterion_04_digit_one_frequency_and_ks():
    target = math.log2(4.0 / 3.0)
    d1 = digit_one_frequency(Q_BIG)
    assert abs(d1 - target) <= 0.01 * target
    assert len_stats(Q_BIG).ks_to_gauss < 0.01


def test_criterion_05_dispersion_decreases_and_is_small():
    d_small = dispersion(Q_SMALL, 0.05)
    d_mid = dispersion(Q_MID, 0.05)
    d_big = dispersion(Q_BIG, 0.05)
    assert d_small > d_mid > d_big
    assert d_big < 0.15


def test_criterion_06_section_crossings_match_the_symbolic_path():
    rng = np.random.default_rng(20250817)
    done = 0
    while done < 500:
        q = int(rng.integers(5, 10**4 + 1))
        p = int(rng.integers(2, q - 1))
        if math.gcd(p, q) != 1:
            continue
        x = ReducedFraction(p, q)
        recs = crossing_sequence(x)
        w = cfe_digits(x)
        drop = 1 if 2 * p < q else 2
        assert len(recs) == len(w.digits) - drop
        y = recs[0].point.y
        for rec in recs:
            assert rec.point.y == y
            y = Fraction(y.denominator % y.numerator, y.numerator)
        last = recs[-1]
        yf, zf = float(last.point.y), float(last.point.z)
        exit_offset = -2.0 * math.log(yf) - 0.5 * math.log((zf / yf) * (1.0 - yf * zf))
        assert abs(last.t + exit_offset - 2.0 * math.log(q)) < 1e-6
        assert len(detect_crossings_numeric(x, 1e-3)) == len(recs)
        done += 1


def test_criterion_07_orbit_time_matches_haar():
    tail = averaged_height_tail(Q_BIG, 2.0)
    ref = haar_height_tail(np.random.default_rng(42), 10**6, 2.0)
    assert abs(tail - ref) <= 0.1 * ref
    assert orbit_fd_histogram(Q_SMALL).discrepancy() > orbit_fd_histogram(Q_BIG).discrepancy()


def test_criterion_08_mean_return_time():
    target = math.pi**2 / (6.0 * math.log(2.0))
    got = mean_return_time(np.random.default_rng(20250817), 10**4)
    assert abs(got - target) / target <= 0.02


def test_criterion_09_bounded_digit_censuses_and_heights():
    brutes = brute_force_censuses(10**4, (1, 2, 3, 4, 5))
    totals = {}
    trees = {}
    for K in (1, 2, 3, 4, 5):
        tree = enumerate_bounded(10**4, K)
        assert dict(tree.counts) == dict(brutes[K].counts)
        assert dict(tree.strict_counts) == dict(brutes[K].strict_counts)
        totals[K] = tree.total()
        trees[K] = tree
    assert totals == {1: 18, 2: 22055, 3: 339110, 4: 1261326, 5: 2676825}
    assert exponent_fit(enumerate_bounded(10**6, 2)) < 0.8
    for K in (1, 2, 3):
        for q, _, _ in trees[K].rows():
            height_bound_check(q, K)  # raises on any violation


def test_criterion_10_length_variance_band():
    ratios = [float(len_stats(q).var_len) / math.log(q) for q in (Q_TINY, Q_SMALL, Q_MID, Q_BIG)]
    assert max(ratios) <= 3.0 * min(ratios)
