"""Empirical measures and the equidistribution experiments.

Everything here reduces to sweeps over the coprime residues p of a
modulus q: digit statistics of p/q under the Gauss map, orbit height
tails against the Haar reference, fundamental-domain histograms, and
the exact no-escape-of-mass counting bound.

Sweeps run vectorized over p in fixed-size chunks merged in ascending
order, so results are deterministic down to the last bit for a given q
and binning. Orbit points are binned exactly: the bin of B/A with
nbins bins is (B * nbins) // A, never a float comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

import mpmath
import numpy as np

from .arith import Modulus, coprime_array, euler_phi, omega
from .cfe import DigitHistogram, ReducedFraction, cfe_len
from .gaussmeasure import LN2, gauss_cdf
from .lattice import fd_point_floats, haar_fd_sample

DEFAULT_BINS = 256
DIGIT_CAP = 64
ZETA2 = math.pi * math.pi / 6.0
#: limit of mean_len / (2 ln q) over coprime numerators, ln 2 / zeta(2)
LEN_RATE = LN2 / ZETA2

_CHUNK = 1 << 18


def _q_int(m: Union[int, Modulus]) -> int:
    return m.q if isinstance(m, Modulus) else int(m)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted histogram over [0,1]; weights may be floats or exact Fractions."""

    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if len(self.weights) != edges.size - 1:
            raise ValueError("need one weight per bin")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", np.asarray(self.weights))

    @property
    def total_weight(self):
        return self.weights.sum()

    def merge(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge measures with different binnings")
        if self.weights.dtype != other.weights.dtype:
            raise ValueError("cannot merge exact and float measures")
        return EmpiricalMeasure(self.edges, self.weights + other.weights)

    def cdf_at_edges(self) -> np.ndarray:
        w = self.weights.astype(np.float64) / float(self.total_weight)
        return np.concatenate(([0.0], np.cumsum(w)))


def uniform_edges(bins: int) -> np.ndarray:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    return np.arange(bins + 1, dtype=np.float64) / bins


def ks_distance(e: EmpiricalMeasure, cdf: Callable[[float], float] = gauss_cdf) -> float:
    """Largest |CDF_e - cdf| over the bin edges."""
    emp = e.cdf_at_edges()
    ref = np.array([cdf(v) for v in e.edges])
    return float(np.max(np.abs(emp - ref)))


def nu_pq(x: ReducedFraction, bins: int = DEFAULT_BINS) -> EmpiricalMeasure:
    """The orbit measure of x: mass 1/len on each Gauss iterate, exact weights."""
    n = cfe_len(x)
    w = np.full(bins, Fraction(0), dtype=object)
    atom = Fraction(1, n)
    a, b = x.q, x.p
    while b:
        w[(b * bins) // a] += atom
        a, b = b, a % b
    return EmpiricalMeasure(uniform_edges(bins), w)


@dataclass(frozen=True)
class _SweepData:
    q: int
    phi: int
    lens: np.ndarray
    hist: np.ndarray
    digit_counts: np.ndarray
    digit1_weighted: float
    pool: int


@lru_cache(maxsize=4)
def _sweep(q: int, bins: int) -> _SweepData:
    """Two vectorized Euclid passes over all coprime p: lengths first, then weighted statistics."""
    if q < 2:
        raise ValueError("q must be >= 2")
    residues = coprime_array(q)
    phi = residues.size
    lens = np.zeros(phi, dtype=np.int16)
    hist = np.zeros(bins, dtype=np.float64)
    digit_counts = np.zeros(DIGIT_CAP + 2, dtype=np.int64)
    digit1_weighted = 0.0
    pool = 0
    for lo in range(0, phi, _CHUNK):
        chunk = residues[lo : lo + _CHUNK].astype(np.int64)
        n = chunk.size
        a = np.full(n, q, dtype=np.int64)
        b = chunk.copy()
        idx = np.arange(n)
        rounds = 0
        while b.size:
            rounds += 1
            r = a % b
            done = r == 0
            lens[lo + idx[done]] = rounds
            keep = ~done
            a, b, idx = b[keep], r[keep], idx[keep]
        w_all = 1.0 / lens[lo : lo + n].astype(np.float64)
        a = np.full(n, q, dtype=np.int64)
        b = chunk
        w = w_all
        while b.size:
            d = a // b
            hist += np.bincount((b * bins) // a, weights=w, minlength=bins)
            digit_counts += np.bincount(np.minimum(d, DIGIT_CAP + 1), minlength=DIGIT_CAP + 2)
            digit1_weighted += float(w[d == 1].sum())
            pool += b.size
            r = a - d * b
            keep = r > 0
            a, b, w = b[keep], r[keep], w[keep]
    return _SweepData(q, phi, lens, hist, digit_counts, digit1_weighted, pool)


def nu_bar(q: Union[int, Modulus], bins: int = DEFAULT_BINS) -> EmpiricalMeasure:
    """Average of nu_pq over all residues coprime to q; total weight 1."""
    qi = _q_int(q)
    if qi < 3:
        raise ValueError("q must be >= 3")
    sd = _sweep(qi, bins)
    return EmpiricalMeasure(uniform_edges(bins), sd.hist / sd.phi)


@dataclass(frozen=True)
class SweepSummary:
    q: int
    phi: int
    mean_len: Fraction
    var_len: Fraction
    digit_hist: DigitHistogram
    ks_to_gauss: float
    skipped_count: int = 0

    def __post_init__(self) -> None:
        if self.mean_len > 2 * math.log2(self.q):
            raise ValueError("mean_len exceeds the 2 log2 q ceiling")


def len_stats(q: Union[int, Modulus], bins: int = DEFAULT_BINS) -> SweepSummary:
    """Exact mean and variance of len(p/q) over coprime p, with the digit census of the sweep."""
    qi = _q_int(q)
    if qi < 3:
        raise ValueError("q must be >= 3")
    sd = _sweep(qi, bins)
    s1 = int(np.sum(sd.lens, dtype=np.int64))
    s2 = int(np.sum(sd.lens.astype(np.int64) ** 2))
    mean = Fraction(s1, sd.phi)
    var = Fraction(s2, sd.phi) - mean * mean
    counts = {d: int(sd.digit_counts[d]) for d in range(1, DIGIT_CAP + 1) if sd.digit_counts[d]}
    dh = DigitHistogram(DIGIT_CAP, counts, int(sd.digit_counts[DIGIT_CAP + 1]))
    ks = ks_distance(EmpiricalMeasure(uniform_edges(bins), sd.hist / sd.phi))
    return SweepSummary(qi, sd.phi, mean, var, dh, ks)


def dispersion(q: Union[int, Modulus], delta: float) -> float:
    """Fraction of residues whose len/(2 ln q) misses the limit constant by more than delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    qi = _q_int(q)
    sd = _sweep(qi, DEFAULT_BINS)
    ratios = sd.lens.astype(np.float64) / (2.0 * math.log(qi))
    return float(np.mean(np.abs(ratios - LEN_RATE) > delta))


def digit_one_frequency(q: Union[int, Modulus], weighted: bool = True) -> float:
    """Aggregated frequency of partial quotient 1 across the sweep.

    weighted=True is the mass the averaged orbit measure puts on digit 1
    (each orbit counts with weight 1/len); weighted=False pools every
    digit of every orbit with equal weight.
    """
    sd = _sweep(_q_int(q), DEFAULT_BINS)
    if weighted:
        return sd.digit1_weighted / sd.phi
    return int(sd.digit_counts[1]) / sd.pool


def _convergent_norm_pairs(x: ReducedFraction) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (m, |m x - n|) over the candidate short vectors of the orbit lattices of x.

    By best approximation, the vector of least norm m^2 e^{-t} + (mx-n)^2 e^t
    always has m a convergent denominator of x (or m = 0, n = 1).
    """
    p, q = x.p, x.q
    ms = [0, 1]
    ds = [1.0, p / q]
    pk1, pk = 1, 0
    qk1, qk = 0, 1
    a, b = q, p
    while b:
        d, r = divmod(a, b)
        pk1, pk = pk, d * pk + pk1
        qk1, qk = qk, d * qk + qk1
        ms.append(qk)
        ds.append(abs(qk * p - pk * q) / q)
        a, b = b, r
    return np.array(ms, dtype=np.float64), np.array(ds)


def orbit_height_tail(x: ReducedFraction, M: float, dt: float) -> float:
    """Fraction of the life span [0, 2 ln q] the orbit of x spends at height >= M.

    Grid average with trapezoid end weights; the height at each grid
    time comes from the exact candidate list of short vectors, not from
    a generic reduction.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if not 0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    span = 2.0 * math.log(x.q)
    n = max(1, int(math.ceil(span / dt)))
    ts = np.linspace(0.0, span, n + 1)
    ms, ds = _convergent_norm_pairs(x)
    lam2 = np.min(
        np.square(ms)[:, None] * np.exp(-ts)[None, :] + np.square(ds)[:, None] * np.exp(ts)[None, :],
        axis=0,
    )
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    return float(np.sum(w * (lam2 * M * M <= 1.0)) / np.sum(w))


def averaged_height_tail(
    q: Union[int, Modulus],
    M: float,
    dt: float = 0.05,
    sample_size: int = 2000,
    seed: int = 0,
) -> float:
    """Mean of orbit_height_tail over a seeded subsample of the coprime residues."""
    qi = _q_int(q)
    residues = coprime_array(qi)
    if residues.size > sample_size:
        rng = np.random.default_rng(seed)
        residues = np.sort(rng.choice(residues, size=sample_size, replace=False))
    vals = [orbit_height_tail(ReducedFraction(int(p), qi), M, dt) for p in residues]
    return float(np.mean(vals))


def haar_height_tail(rng: np.random.Generator, n: int, M: float) -> float:
    """Monte Carlo estimate of the Haar probability of height >= M (uses ht^2 = y on the domain)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    _, y = haar_fd_sample(rng, n)
    return float(np.mean(y >= M * M))


class MassEscapeBoundError(AssertionError):
    """The exact counting bound (4/M^2) phi(q) failed; this is a theorem, so it means a bug."""


@dataclass(frozen=True)
class MassEscapeReport:
    q: int
    M: float
    t: float
    count: int
    bound: Fraction
    in_hypothesis: bool
    escalations: int


def mass_escape_count(
    q: Union[int, Modulus], M: float, t: float, checked: bool = True
) -> MassEscapeReport:
    """Exact count of residues p whose orbit lattice at time t holds a vector of norm <= 1/M.

    The membership test m^2 e^{-t} + dist(m p/q, Z)^2 e^t <= 1/M^2 runs
    over 1 <= m <= e^{t/2}/M and the two integers nearest -m p/q.
    Comparisons use doubles with a 2^-40 relative margin and escalate to
    50-digit arithmetic on margin hits. The count is asserted against
    the bound (4/M^2) phi(q), which is exact in the hypothesis range
    0 <= t <= ln q - 2 omega(q); checked=False skips the range guard for
    exploration outside it.
    """
    qi = _q_int(q)
    if M <= 1:
        raise ValueError("M must be > 1")
    window = math.log(qi) - 2 * omega(qi)
    in_hyp = 0 <= t <= window
    if checked and not in_hyp:
        raise ValueError(f"t={t} outside the hypothesis range [0, {window:.4f}] for q={qi}")
    phi = euler_phi(qi)
    inv_m2 = 1.0 / (M * M)
    emt = math.exp(-t)
    ept = math.exp(t)
    margin = 2.0**-40
    escalations = 0
    hits: set[int] = set()

    def accept(m: int, r: int) -> bool:
        nonlocal escalations
        val = m * m * emt + (r / qi) ** 2 * ept
        if abs(val - inv_m2) > margin * inv_m2:
            return val <= inv_m2
        escalations += 1
        with mpmath.workdps(50):
            lhs = m * m * mpmath.exp(-t) + (mpmath.mpf(r) / qi) ** 2 * mpmath.exp(t)
            return lhs <= mpmath.mpf(1) / (M * M)

    m_max = int(math.exp(t / 2.0) / M)
    for m in range(1, m_max + 1):
        rad2 = (inv_m2 - m * m * emt) * emt
        if rad2 < 0:
            continue
        w_int = int(qi * math.sqrt(rad2) * (1 + 1e-12)) + 1
        g = math.gcd(m, qi)
        qg = qi // g
        inv = pow(m // g, -1, qg) if qg > 1 else 0
        for r in range(0, min(w_int, qi - 1) + 1):
            for rr in {r, qi - r} if r else {0}:
                if rr % g:
                    continue
                if rr == 0 and m % qi:
                    continue
                base = (inv * ((rr % qi) // g)) % qg if qg > 1 else 1
                for j in range(g):
                    pp = base + j * qg
                    if 0 < pp < qi and math.gcd(pp, qi) == 1 and (pp * m - rr) % qi == 0:
                        if accept(m, min(rr, qi - rr)):
                            hits.add(pp)
    count = len(hits)
    bound = Fraction(4 * phi) / (Fraction(M) ** 2)
    if in_hyp and count > bound:
        raise MassEscapeBoundError(
            f"count {count} exceeds (4/M^2) phi = {float(bound):.3f} at q={qi}, M={M}, t={t}"
        )
    return MassEscapeReport(qi, M, t, count, bound, in_hyp, escalations)


@dataclass(frozen=True)
class FdHistogram:
    """Probability histogram over the fundamental domain in (x, 1/y) cells, with Haar cell masses.

    The coordinate v = 1/y makes the Haar measure uniform (density
    3/pi), so expected masses have a closed form and every cell of the
    domain carries comparable weight.
    """

    grid: int
    weights: np.ndarray
    expected: np.ndarray

    def discrepancy(self) -> float:
        """Chi-square style score: sum of (observed - expected)^2 / expected over the domain cells."""
        mask = self.expected > 0
        obs = self.weights / self.weights.sum()
        d = obs[mask] - self.expected[mask]
        return float(np.sum(d * d / self.expected[mask]))


V_MAX = 2.0 / math.sqrt(3.0)


def fd_cell_masses(grid: int) -> np.ndarray:
    """Exact Haar mass of each (x, v) cell on the grid x in [-1/2,1/2], v in [0, 2/sqrt(3)]."""

    def strip(vcap: float, x0: float, x1: float) -> float:
        # integral over [x0, x1] of min(vcap, 1/sqrt(1-x^2)) dx
        if vcap <= 1.0:
            return vcap * (x1 - x0)
        xv = math.sqrt(1.0 - 1.0 / (vcap * vcap))
        lo, hi = max(x0, -xv), min(x1, xv)
        inner = math.asin(hi) - math.asin(lo) if hi > lo else 0.0
        right = max(0.0, x1 - max(x0, xv))
        left = max(0.0, min(x1, -xv) - x0)
        return inner + (left + right) * vcap

    xs = np.linspace(-0.5, 0.5, grid + 1)
    vs = np.linspace(0.0, V_MAX, grid + 1)
    out = np.zeros((grid, grid))
    for i in range(grid):
        for j in range(grid):
            out[i, j] = strip(vs[j + 1], xs[i], xs[i + 1]) - strip(vs[j], xs[i], xs[i + 1])
    return out * (3.0 / math.pi)


def _fd_accumulate(xs: np.ndarray, vs: np.ndarray, w: np.ndarray, grid: int) -> np.ndarray:
    ix = np.clip(((xs + 0.5) * grid).astype(np.int64), 0, grid - 1)
    iv = np.clip((vs / V_MAX * grid).astype(np.int64), 0, grid - 1)
    return np.bincount(ix * grid + iv, weights=w, minlength=grid * grid).reshape(grid, grid)


def orbit_fd_histogram(
    q: Union[int, Modulus],
    dt: float = 0.05,
    grid: int = 24,
    sample_size: int = 600,
    seed: int = 0,
) -> FdHistogram:
    """Fundamental-domain occupation histogram of the orbits of a residue subsample."""
    qi = _q_int(q)
    residues = coprime_array(qi)
    if residues.size > sample_size:
        rng = np.random.default_rng(seed)
        residues = np.sort(rng.choice(residues, size=sample_size, replace=False))
    span = 2.0 * math.log(qi)
    n = max(1, int(math.ceil(span / dt)))
    ts = np.linspace(0.0, span, n + 1)
    half = np.exp(ts / 2.0)
    tw = np.ones(n + 1)
    tw[0] = tw[-1] = 0.5
    weights = np.zeros((grid, grid))
    for p in residues:
        xf = int(p) / qi
        xs = np.empty(n + 1)
        vs = np.empty(n + 1)
        for i in range(n + 1):
            fx, fy = fd_point_floats(1.0 / half[i], xf * half[i], 0.0, half[i])
            xs[i] = fx
            vs[i] = 1.0 / fy
        weights += _fd_accumulate(xs, vs, tw, grid)
    return FdHistogram(grid, weights, fd_cell_masses(grid))


def haar_fd_histogram(rng: np.random.Generator, n: int, grid: int = 24) -> FdHistogram:
    """Reference histogram of haar_sample points on the same cells."""
    xs, ys = haar_fd_sample(rng, n)
    weights = _fd_accumulate(xs, 1.0 / ys, np.ones(n), grid)
    return FdHistogram(grid, weights, fd_cell_masses(grid))
