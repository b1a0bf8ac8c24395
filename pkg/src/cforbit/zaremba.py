"""Bounded-digit censuses and the orbit-height compactness bound.

A residue p coprime to q is a level-K member when p/q admits a
continued-fraction representation with every digit at most K. In terms
of the canonical word (which never ends in 1) that reads: a_i <= K for
i < n and a_n <= K + 1, since [.., a_n] = [.., a_n - 1, 1]. The strict
count additionally caps the last canonical digit at K.

Censuses are built two independent ways: a pruned walk of the digit
tree through the continuant recursion q_{k+1} = a*q_k + q_{k-1}, and a
direct digit filter over the coprime residues of each q, kept as the
oracle. Orbits of members must stay below height sqrt(2)*(K+1)^{3/2}
over their whole lifetime; height_bound_check measures that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .arith import coprime_array, dual_residue
from .cfe import ReducedFraction
from .gaussmeasure import LN2
from .stats import _convergent_norm_pairs


@dataclass(frozen=True)
class ZarembaCensus:
    """Member counts per denominator q <= Q at digit bound K.

    counts holds the relaxed membership (last canonical digit allowed
    up to K+1), strict_counts the all-digits-at-most-K variant. Only
    denominators with at least one relaxed member are stored.
    """

    K: int
    Q: int
    counts: Mapping[int, int]
    strict_counts: Mapping[int, int]

    def __post_init__(self) -> None:
        if self.K < 1 or self.Q < 2:
            raise ValueError("census needs K >= 1 and Q >= 2")
        for q, c in self.counts.items():
            if not 2 <= q <= self.Q or c <= 0:
                raise ValueError(f"bad census entry q={q}")
            if self.strict_counts.get(q, 0) > c:
                raise ValueError(f"strict count exceeds relaxed count at q={q}")

    def count(self, q: int) -> int:
        return self.counts.get(q, 0)

    def strict_count(self, q: int) -> int:
        return self.strict_counts.get(q, 0)

    def total(self, upto: Optional[int] = None) -> int:
        """Relaxed members with denominator at most upto (all of them by default)."""
        if upto is None or upto >= self.Q:
            return sum(self.counts.values())
        return sum(c for q, c in self.counts.items() if q <= upto)

    def merge(self, other: "ZarembaCensus") -> "ZarembaCensus":
        """Key-wise sum; branches of a split enumeration merge associatively."""
        if (self.K, self.Q) != (other.K, other.Q):
            raise ValueError("can only merge censuses with equal K and Q")
        counts = dict(self.counts)
        for q, c in other.counts.items():
            counts[q] = counts.get(q, 0) + c
        strict = dict(self.strict_counts)
        for q, c in other.strict_counts.items():
            strict[q] = strict.get(q, 0) + c
        return ZarembaCensus(self.K, self.Q, counts, strict)

    def rows(self) -> Iterator[tuple[int, int, int]]:
        """(q, count_relaxed, count_strict) in ascending q, populated rows only."""
        for q in sorted(self.counts):
            yield q, self.counts[q], self.strict_counts.get(q, 0)


def enumerate_bounded(Q: int, K: int, first_digit: Optional[int] = None) -> ZarembaCensus:
    """Census of every level-K fraction with denominator at most Q.

    Walks the digit tree breadth-first over (q_{k-1}, q_k) states,
    closing each state with final digits 2..K+1 and extending it with
    interior digits 1..K. A state is pruned once even the cheapest
    closure (final digit 2) overshoots Q, so the walk touches each
    admissible word exactly once. first_digit restricts the walk to a
    single first-digit branch; merging the branches recovers the full
    census.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if Q < 2:
        raise ValueError("Q must be >= 2")
    if first_digit is not None and not 1 <= first_digit <= K + 1:
        raise ValueError(f"first digit must lie in [1, {K + 1}]")
    branch = range(1, K + 2) if first_digit is None else (first_digit,)
    relaxed = np.zeros(Q + 1, dtype=np.int64)
    strict = np.zeros(Q + 1, dtype=np.int64)
    # single-digit words [a] have q = a and no interior digits
    for a in branch:
        if 2 <= a <= Q:
            relaxed[a] += 1
            if a <= K:
                strict[a] += 1
    firsts = [a for a in branch if a <= K and 2 * a + 1 <= Q]
    prev = np.ones(len(firsts), dtype=np.int64)
    cur = np.array(firsts, dtype=np.int64)
    while cur.size:
        for a in range(2, K + 2):
            qs = a * cur + prev
            inside = qs <= Q
            if inside.any():
                hits = np.bincount(qs[inside], minlength=Q + 1)
                relaxed += hits
                if a <= K:
                    strict += hits
        nxt_prev = []
        nxt_cur = []
        for a in range(1, K + 1):
            nc = a * cur + prev
            alive = 2 * nc + cur <= Q
            if alive.any():
                nxt_prev.append(cur[alive])
                nxt_cur.append(nc[alive])
        prev = np.concatenate(nxt_prev) if nxt_prev else np.empty(0, dtype=np.int64)
        cur = np.concatenate(nxt_cur) if nxt_cur else np.empty(0, dtype=np.int64)
    counts = {int(q): int(c) for q, c in enumerate(relaxed) if c}
    strict_counts = {int(q): int(c) for q, c in enumerate(strict) if c}
    return ZarembaCensus(K, Q, counts, strict_counts)


def _digit_profile(q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(p, max interior digit, last digit) over the coprime residues of q.

    One vectorized Euclid run; columns retire as their remainder hits 0.
    """
    ps = coprime_array(q)
    n = ps.size
    top = np.zeros(n, dtype=np.int64)
    last = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    a = np.full(n, q, dtype=np.int64)
    b = ps.copy()
    mx = np.zeros(n, dtype=np.int64)
    while b.size:
        d, r = np.divmod(a, b)
        fin = r == 0
        if fin.any():
            last[idx[fin]] = d[fin]
            top[idx[fin]] = mx[fin]
        live = ~fin
        a, b, idx = b[live], r[live], idx[live]
        mx = np.maximum(mx[live], d[live])
    return ps, top, last


def members(q: int, K: int, strict: bool = False) -> np.ndarray:
    """Level-K residues of q by direct digit filtering (the census oracle)."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if K < 1:
        raise ValueError("K must be >= 1")
    ps, top, last = _digit_profile(q)
    cap = K if strict else K + 1
    return ps[(top <= K) & (last <= cap)]


def brute_force_censuses(Q: int, Ks: Sequence[int]) -> dict[int, ZarembaCensus]:
    """Censuses at several digit bounds from one digit-filter pass over q <= Q."""
    if Q < 2:
        raise ValueError("Q must be >= 2")
    if not Ks or any(K < 1 for K in Ks):
        raise ValueError("digit bounds must be >= 1")
    tallies: dict[int, tuple[dict, dict]] = {K: ({}, {}) for K in Ks}
    for q in range(2, Q + 1):
        _, top, last = _digit_profile(q)
        for K, (counts, strict_counts) in tallies.items():
            ok = top <= K
            c = int(np.count_nonzero(ok & (last <= K + 1)))
            if c:
                counts[q] = c
                s = int(np.count_nonzero(ok & (last <= K)))
                if s:
                    strict_counts[q] = s
    return {K: ZarembaCensus(K, Q, c, s) for K, (c, s) in tallies.items()}


def brute_force_census(Q: int, K: int) -> ZarembaCensus:
    """Quadratic-time cross-check for enumerate_bounded; keep Q modest."""
    return brute_force_censuses(Q, (K,))[K]


def exponent_fit(census: ZarembaCensus) -> float:
    """Fitted growth exponent of the per-q mean member count.

    Least-squares slope of ln(mean count over q in [2^j, 2^{j+1})) vs
    ln q, one point per complete dyadic window, taken at the window's
    geometric midpoint. Window means smooth the heavy q-to-q
    fluctuation of the raw counts; empty windows are skipped.
    """
    sums: dict[int, int] = {}
    for q, c in census.counts.items():
        j = q.bit_length() - 1
        sums[j] = sums.get(j, 0) + c
    jmax = (census.Q + 1).bit_length() - 2
    xs = []
    ys = []
    for j in range(1, jmax + 1):
        s = sums.get(j, 0)
        if s == 0:
            continue
        xs.append((j + 0.5) * LN2)
        ys.append(math.log(s / float(1 << j)))
    if len(xs) < 4:
        raise ValueError("need at least 4 complete dyadic windows")
    slope = np.polyfit(np.array(xs), np.array(ys), 1)[0]
    return float(slope)


class HeightBoundError(AssertionError):
    """An orbit of a bounded-digit fraction left the compact part it must stay in."""


@dataclass(frozen=True)
class HeightBoundReport:
    q: int
    K: int
    dt: float
    bound: float
    checked: int
    max_height: float
    argmax_t: float
    argmax_p: int


def height_bound_check(q: int, K: int, dt: float = 0.05) -> HeightBoundReport:
    """Grid-sample orbit heights of every level-K member of q against the bound.

    The lifetime grid covers t in [0, 2 ln q]; heights come from the
    exact candidate list of short vectors. The first sample above
    sqrt(2)*(K+1)^{3/2} raises with the witness (p, t, ht); otherwise
    the report carries the largest height seen and where it happened.
    """
    if not 2 <= q <= 10**6:
        raise ValueError("q must lie in [2, 10^6]")
    if not 0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    bound = math.sqrt(2.0) * (K + 1) ** 1.5
    span = 2.0 * math.log(q)
    n = max(1, int(math.ceil(span / dt)))
    ts = np.linspace(0.0, span, n + 1)
    grow = np.exp(ts)
    decay = np.exp(-ts)
    ps = members(q, K)
    best = 0.0
    best_t = 0.0
    best_p = 0
    for p in ps:
        ms, ds = _convergent_norm_pairs(ReducedFraction(int(p), q))
        lam2 = np.min(
            np.square(ms)[:, None] * decay[None, :] + np.square(ds)[:, None] * grow[None, :],
            axis=0,
        )
        i = int(np.argmin(lam2))
        ht = 1.0 / math.sqrt(lam2[i])
        if ht > best:
            best, best_t, best_p = ht, float(ts[i]), int(p)
            if best > bound:
                raise HeightBoundError(
                    f"p={best_p}, t={best_t:.6f}, ht={best:.6f} exceeds "
                    f"bound {bound:.6f} at K={K}, q={q}"
                )
    return HeightBoundReport(q, K, dt, bound, int(ps.size), best, best_t, best_p)


def dual_closure_fraction(q: int, K: int) -> float:
    """Fraction of level-K members whose dual residue (p*p' = -1 mod q) is again one.

    Digit reversal suggests closure but the relaxed last-digit slack
    breaks it; measured and reported, never asserted. Vacuously 1.0
    when q has no members.
    """
    have = {int(p) for p in members(q, K)}
    if not have:
        return 1.0
    hit = sum(1 for p in have if dual_residue(p, q) in have)
    return hit / len(have)
