"""
Prime generation and root counting modulo primes.

rho(F, p) is the number of residues n mod p with F(n) = 0 mod p. Small
primes are counted by evaluating F at every residue; larger primes use
deg gcd(F, x^p - x) over GF(p).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Optional, Sequence

import numpy as np
from sympy import factorint, legendre_symbol
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_degree, gf_edf_zassenhaus, gf_gcd, gf_monic, gf_pow_mod, gf_sub

from config.settings import RHO_CROSSOVER, SEGMENT_SIZE
from utils.errors import InputError
from utils.polyalg import IntPolynomial, discriminant, product

logger = logging.getLogger(__name__)

_X = [1, 0]
# largest prime for which vectorised int64 products stay exact
_VECTOR_LIMIT = 3 * 10 ** 9


@lru_cache(maxsize=8)
def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as a read-only int64 array."""
    if limit < 2:
        primes = np.array([], dtype=np.int64)
    else:
        is_prime = np.ones(limit + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, math.isqrt(limit) + 1):
            if is_prime[p]:
                is_prime[p * p::p] = False
        primes = np.flatnonzero(is_prime).astype(np.int64)
    primes.flags.writeable = False
    return primes


def segment_mask(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality mask for the integers lo <= n < hi; base must hold the primes <= sqrt(hi)."""
    mask = np.ones(max(hi - lo, 0), dtype=bool)
    for p in base.tolist():
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        mask[start - lo::p] = False
    if lo < 2:
        mask[:2 - lo] = False
    return mask


class PrimeStream:
    """
    Segmented enumeration of the primes in [start, limit].

    Segments come out in increasing order, so reductions over them are
    deterministic.
    """

    def __init__(self, limit: int, segment_size: int = SEGMENT_SIZE, start: int = 2):
        if limit >= 2 ** 64:
            raise InputError("prime generation is limited to 64-bit integers")
        self.limit = int(limit)
        self.start = max(int(start), 0)
        self.segment_size = int(segment_size)

    def segments(self) -> Iterator[np.ndarray]:
        base = simple_sieve(math.isqrt(self.limit) + 1)
        lo = self.start
        while lo <= self.limit:
            hi = min(lo + self.segment_size, self.limit + 1)
            yield lo + np.flatnonzero(segment_mask(lo, hi, base)).astype(np.int64)
            lo = hi

    def __iter__(self) -> Iterator[int]:
        for segment in self.segments():
            yield from segment.tolist()


def primes_up_to(limit: int) -> np.ndarray:
    if limit <= 5 * 10 ** 7:
        return simple_sieve(int(limit))
    return np.concatenate(list(PrimeStream(limit).segments()))


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes p with lo <= p < hi."""
    if hi <= lo:
        return np.array([], dtype=np.int64)
    if hi <= 5 * 10 ** 7:
        primes = simple_sieve(int(hi))
        return primes[(primes >= lo) & (primes < hi)]
    return np.concatenate(list(PrimeStream(hi - 1, start=lo).segments()))


def _brute_force(F: IntPolynomial, p: int) -> np.ndarray:
    """Residue of F(n) mod p for every n in 0..p-1."""
    n = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for a in reversed(F.coeffs):
        acc = (acc * n + (a % p)) % p
    return acc


def rho(F: IntPolynomial, p: int, crossover: int = RHO_CROSSOVER) -> int:
    """Number of solutions of F(n) = 0 mod p."""
    if p < crossover:
        return int(np.count_nonzero(_brute_force(F, p) == 0))
    f = F.mod(p)
    if not f:
        return p
    if gf_degree(f) == 0:
        return 0
    h = gf_pow_mod(_X, p, f, p, ZZ)
    return gf_degree(gf_gcd(f, gf_sub(h, _X, p, ZZ), p, ZZ))


def roots_mod_p(F: IntPolynomial, p: int, crossover: int = RHO_CROSSOVER) -> List[int]:
    """Sorted roots of F modulo p."""
    if p < crossover:
        return np.flatnonzero(_brute_force(F, p) == 0).tolist()
    f = F.mod(p)
    if not f:
        return list(range(p))
    if gf_degree(f) == 0:
        return []
    h = gf_pow_mod(_X, p, f, p, ZZ)
    g = gf_gcd(f, gf_sub(h, _X, p, ZZ), p, ZZ)
    if gf_degree(g) <= 0:
        return []
    _, g = gf_monic(g, p, ZZ)
    # product of distinct linear factors; split into x - r
    return sorted(int(-factor[1]) % p for factor in gf_edf_zassenhaus(g, 1, p, ZZ))


def rho_squarefree(F: IntPolynomial, d: int) -> int:
    """rho extended multiplicatively to a squarefree modulus."""
    if d < 1:
        raise InputError(f"modulus must be positive, got {d}")
    total = 1
    for p, exponent in factorint(d).items():
        if exponent > 1:
            raise InputError(f"{d} is not squarefree")
        total *= rho(F, int(p))
    return total


class RhoSplit(NamedTuple):
    total: int
    exact: bool


def rho_split(factors: Sequence[IntPolynomial], p: int, abs_disc: Optional[int] = None) -> RhoSplit:
    """
    Sum of the per-factor root counts. The sum equals rho of the product
    whenever p exceeds the absolute discriminant of the product.
    """
    if abs_disc is None:
        abs_disc = discriminant(product(factors)).abs_disc
    return RhoSplit(sum(rho(F, p) for F in factors), p > abs_disc)


def legendre(a: int, p: int) -> int:
    try:
        return int(legendre_symbol(a % p, p))
    except ValueError as exc:
        raise InputError(f"Legendre symbol needs an odd prime, got {p}") from exc


def _int_mod(a: int, primes: np.ndarray) -> np.ndarray:
    if abs(a) < 2 ** 62:
        return np.int64(a) % primes
    return np.array([a % p for p in primes.tolist()], dtype=np.int64)


def _powmod(base: np.ndarray, exponent: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    result = np.ones_like(base)
    b = base % modulus
    e = exponent.copy()
    while e.any():
        odd = (e & 1).astype(bool)
        result[odd] = (result[odd] * b[odd]) % modulus[odd]
        b = (b * b) % modulus
        e >>= 1
    return result


def rho_array(F: IntPolynomial, primes: np.ndarray) -> np.ndarray:
    """rho(F, p) for every prime in an array, vectorised for degrees one and two."""
    primes = np.asarray(primes, dtype=np.int64)
    out = np.empty(len(primes), dtype=np.int64)
    if len(primes) and int(primes[-1]) >= _VECTOR_LIMIT:
        out[:] = [rho(F, p) for p in primes.tolist()]
        return out
    if F.degree == 1:
        b, a = F.coeffs
        a_mod, b_mod = _int_mod(a, primes), _int_mod(b, primes)
        out[:] = 1
        divides = a_mod == 0
        out[divides] = np.where(b_mod[divides] == 0, primes[divides], 0)
        return out
    if F.degree == 2:
        c0, b, a = F.coeffs
        generic = (primes > 2) & (_int_mod(a, primes) != 0)
        p = primes[generic]
        residue = _int_mod(b * b - 4 * a * c0, p)
        symbol = _powmod(residue, (p - 1) // 2, p)
        out[generic] = np.where(residue == 0, 1, np.where(symbol == 1, 2, 0))
        out[~generic] = [rho(F, q) for q in primes[~generic].tolist()]
        return out
    out[:] = [rho(F, p) for p in primes.tolist()]
    return out


def rho_product_array(factors: Sequence[IntPolynomial], primes: np.ndarray, abs_disc: int) -> np.ndarray:
    """rho of the product of the factors, split into per-factor sums above abs_disc."""
    primes = np.asarray(primes, dtype=np.int64)
    if len(factors) == 1:
        return rho_array(factors[0], primes)
    out = np.zeros(len(primes), dtype=np.int64)
    split = primes > abs_disc
    for F in factors:
        out[split] += rho_array(F, primes[split])
    out[~split] = rho_array(product(factors), primes[~split])
    return out


@dataclass(frozen=True, eq=False)
class RhoTable:
    """rho_F(p) for every prime p up to a limit."""

    poly: IntPolynomial
    primes: np.ndarray
    values: np.ndarray

    def __getitem__(self, p: int) -> int:
        idx = int(np.searchsorted(self.primes, p))
        if idx >= len(self.primes) or int(self.primes[idx]) != p:
            raise KeyError(p)
        return int(self.values[idx])

    def __len__(self) -> int:
        return len(self.primes)

    def rows(self):
        return zip(self.primes.tolist(), self.values.tolist())


def rho_table(F: IntPolynomial, limit: int) -> RhoTable:
    primes = primes_up_to(limit)
    return RhoTable(F, primes, rho_array(F, primes))
