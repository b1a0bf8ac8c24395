"""Exact elementary number theory for the sweep machinery.

Everything is integer arithmetic: factorization by trial division, totient
and distinct-prime counts read off the factorization, coprime residue
enumeration, and the pairing p -> p' with p*p' = -1 (mod q).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

Rational = Union[int, float, Fraction]


@dataclass(frozen=True)
class Modulus:
    """A positive integer with its prime factorization attached.

    prime_factors is a sorted tuple of (prime, exponent); empty for q = 1.
    """

    q: int
    prime_factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        prod = 1
        last = 1
        for p, e in self.prime_factors:
            if p <= last or e < 1:
                raise ValueError("prime_factors must be strictly increasing primes with positive exponents")
            last = p
            prod *= p**e
        if prod != self.q:
            raise ValueError(f"prime_factors do not multiply back to q={self.q}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.prime_factors)


def factorize(q: int) -> Modulus:
    """Trial division up to sqrt(q). q = 1 gets the empty factorization."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    n = q
    factors: list[tuple[int, int]] = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
    d = 5
    while d * d <= n:
        for p in (d, d + 2):
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                factors.append((p, e))
        d += 6
    if n > 1:
        factors.append((n, 1))
    return Modulus(q, tuple(factors))


def _as_modulus(q: int | Modulus) -> Modulus:
    return q if isinstance(q, Modulus) else factorize(q)


def euler_phi(m: int | Modulus) -> int:
    """phi(q) = q * prod(1 - 1/p) over distinct primes p of q. phi(1) = 1."""
    m = _as_modulus(m)
    phi = m.q
    for p, _ in m.prime_factors:
        phi -= phi // p
    return phi


def omega(m: int | Modulus) -> int:
    """Number of distinct prime factors. omega(1) = 0."""
    return len(_as_modulus(m).prime_factors)


def coprime_residues(m: int | Modulus) -> Iterator[int]:
    """Yield the residues in [1, q] coprime to q, increasing.

    For q = 1 the single residue 1 is yielded (degenerate convention: the
    unit group of the trivial ring is represented by 1).
    """
    m = _as_modulus(m)
    if m.q == 1:
        yield 1
        return
    for p in range(1, m.q + 1):
        if math.gcd(p, m.q) == 1:
            yield p


def coprime_array(m: int | Modulus) -> np.ndarray:
    """All coprime residues in [1, q-1] as an int64 array (q >= 2).

    Sieve by the distinct prime factors; used by the vectorized sweeps.
    """
    m = _as_modulus(m)
    if m.q < 2:
        raise ValueError("coprime_array needs q >= 2")
    p = np.arange(1, m.q, dtype=np.int64)
    mask = np.ones(m.q - 1, dtype=bool)
    for pr in m.primes:
        mask &= (p % pr) != 0
    return p[mask]


def count_coprime_upto(m: int | Modulus, alpha: Rational) -> int:
    """Exact #{1 <= l <= alpha*q : gcd(l, q) = 1} by inclusion-exclusion.

    The count differs from alpha*phi(q) by at most 2^omega(q).
    """
    m = _as_modulus(m)
    alpha = Fraction(alpha)
    if alpha < 0 or alpha > 1:
        raise ValueError("alpha must lie in [0, 1]")
    kmax = math.floor(alpha * m.q)
    if kmax <= 0:
        return 0
    # signed squarefree divisors of rad(q)
    divs = [(1, 1)]
    for p in m.primes:
        divs += [(d * p, -s) for d, s in divs]
    return sum(s * (kmax // d) for d, s in divs)


def dual_residue(p: int, m: int | Modulus) -> int:
    """The residue p' in [1, q-1] with p*p' = -1 (mod q), q >= 2.

    Applying it twice returns p (mod q).
    """
    m = _as_modulus(m)
    if m.q < 2:
        raise ValueError("dual_residue needs q >= 2")
    if math.gcd(p, m.q) != 1:
        raise ValueError(f"p={p} is not coprime to q={m.q}")
    return (-pow(p, -1, m.q)) % m.q


def smallest_prime_factors(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n, for n in [0, limit]; spf[0] = spf[1] = 0.

    One sieve shared by whole-range sweeps (factoring each q by repeated spf
    division costs O(log q)).
    """
    spf = np.zeros(limit + 1, dtype=np.int64)
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i::i][spf[i::i] == 0] = i
    return spf


def factorize_with_spf(q: int, spf: np.ndarray) -> Modulus:
    if q < 1:
        raise ValueError("q must be a positive integer")
    n = q
    factors: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        factors.append((p, e))
    return Modulus(q, tuple(factors))
