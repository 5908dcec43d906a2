"""Exact modular arithmetic, primality and primitive-root search.

Everything here works on Python integers, so moduli up to 2**64 never
overflow. Residue orbits are returned as numpy arrays for the vectorised
statistics downstream.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from ergomix.errors import InvalidModulus, NotAGenerator, NotAUnit

# Deterministic Miller-Rabin: these bases are exact for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 53 * 53:
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_in_range(lo: int, hi: int) -> list[int]:
    """All primes p with lo <= p <= hi, in increasing order."""
    if hi < 2 or hi < lo:
        return []
    lo = max(lo, 2)
    if hi <= 50_000_000:
        sieve = np.ones(hi + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, math.isqrt(hi) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        return [int(p) for p in np.flatnonzero(sieve[lo:]) + lo]
    return [n for n in range(lo, hi + 1) if is_prime(n)]


def mod_pow(base: int, exp: int, r: int) -> int:
    if r < 2:
        raise InvalidModulus(f"modulus must be >= 2, got {r}")
    if exp < 0:
        raise ValueError("exponent must be nonnegative")
    return pow(base, exp, r)


def _pollard_brent(n: int) -> int:
    # returns a nontrivial factor of an odd composite n
    for c in range(1, n):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"failed to split {n}")


@lru_cache(maxsize=4096)
def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of n >= 1, sorted."""
    found: set[int] = set()
    for p in _SMALL_PRIMES:
        if n % p == 0:
            found.add(p)
            while n % p == 0:
                n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            found.add(m)
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return tuple(sorted(found))


def _check_prime_modulus(r: int) -> None:
    if r < 3 or not is_prime(r):
        raise InvalidModulus(f"r must be an odd prime, got {r}")


def multiplicative_order(q: int, r: int) -> int:
    """Order of q in the unit group mod the prime r, found by stripping
    prime factors off r - 1."""
    _check_prime_modulus(r)
    if q % r == 0:
        raise NotAUnit(f"{q} is not a unit mod {r}")
    d = r - 1
    for p in prime_factors(r - 1):
        while d % p == 0 and pow(q, d // p, r) == 1:
            d //= p
    return d


def is_primitive_root(q: int, r: int) -> bool:
    _check_prime_modulus(r)
    if q % r == 0:
        return False
    return all(pow(q, (r - 1) // p, r) != 1 for p in prime_factors(r - 1))


def minimal_primitive_root(r: int) -> int:
    _check_prime_modulus(r)
    factors = prime_factors(r - 1)
    q = 2
    while True:
        if all(pow(q, (r - 1) // p, r) != 1 for p in factors):
            return q
        q += 1


@dataclass(frozen=True, eq=False)
class ResidueSequence:
    """Orbit of a primitive root: ``rho[i] = q**i mod r`` for i = 0..r.

    Index 0 holds q**0 = 1 so that the array can be indexed 1-based;
    ``rho[r] == rho[1]`` because q**r = q mod r.
    """

    r: int
    q: int
    rho: np.ndarray

    def __post_init__(self) -> None:
        self.rho.setflags(write=False)


def residue_sequence(q: int, r: int) -> ResidueSequence:
    if not is_primitive_root(q, r):
        raise NotAGenerator(f"{q} is not a primitive root mod {r}")
    q %= r
    out = [1] * (r + 1)
    x = 1
    for i in range(1, r + 1):
        x = x * q % r
        out[i] = x
    dtype = np.int64 if r < 2**62 else object
    return ResidueSequence(r=r, q=q, rho=np.array(out, dtype=dtype))


@dataclass(frozen=True)
class BurgessRow:
    prime: int
    q_min: int

    @property
    def sqrt_bound_ok(self) -> bool:
        # q < sqrt(r) iff q*q < r for integers
        return self.q_min * self.q_min < self.prime

    @property
    def ratio_sqrt(self) -> float:
        return self.q_min / math.sqrt(self.prime)

    @property
    def ratio_fourth_root(self) -> float:
        return self.q_min / self.prime**0.25


@dataclass(frozen=True)
class BurgessReport:
    lo: int
    hi: int
    rows: tuple[BurgessRow, ...]

    def __iter__(self) -> Iterator[BurgessRow]:
        return iter(self.rows)

    @property
    def n_primes(self) -> int:
        return len(self.rows)

    @property
    def n_below_sqrt(self) -> int:
        return sum(row.sqrt_bound_ok for row in self.rows)

    @property
    def fraction_below_sqrt(self) -> float:
        return self.n_below_sqrt / len(self.rows) if self.rows else float("nan")

    @property
    def max_ratio_fourth_root(self) -> float:
        return max((row.ratio_fourth_root for row in self.rows), default=float("nan"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["prime", "q_min", "sqrt_bound_ok", "ratio_fourth_root"])
        for row in self.rows:
            w.writerow([row.prime, row.q_min, int(row.sqrt_bound_ok), repr(row.ratio_fourth_root)])
        return buf.getvalue()


def burgess_scan(lo: int, hi: int) -> BurgessReport:
    """Minimal primitive root of every prime in [lo, hi]."""
    if lo < 3:
        raise ValueError("lo must be >= 3")
    rows = tuple(BurgessRow(p, minimal_primitive_root(p)) for p in primes_in_range(lo, hi))
    return BurgessReport(lo=lo, hi=hi, rows=rows)
