"""
Verification service for explicit-sieve.

Brute-force oracles for the sieve: exact sifted counts against exact
rational W(z) and G(z), remainder records, window and prime-tuple counts
from two independent implementations, Sophie Germain counts and numerical
checks of the prime-sum envelopes behind the constant tower.

None of this tests the final bound itself. Its threshold (log x of order
10^7 and beyond) is out of reach of any enumeration.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from mpmath import libmp
from sympy import isprime, mobius
from sympy.ntheory.modular import crt

from config.settings import (COUNT_MAX_N, DIRECT_COUNT_BUDGET, REMAINDER_MAX_D, ROOT_SIEVE_LIMIT,
                             SEGMENT_SIZE, SG_MAX_N, SIFT_MAX_Y, SIFT_MAX_Z, WORKERS)
from services.constants_service import PolySystem, lf_empirical_check
from services.euler_service import singular_series
from services.sieve_service import SieveParams, m1
from utils.errors import DomainError, InputError, OracleError, RangeError
from utils.mertens import float_sum, reciprocal_sum_residual
from utils.modarith import (legendre, primes_between, primes_up_to, rho, rho_array, rho_squarefree, roots_mod_p,
                            segment_mask, simple_sieve)
from utils.polyalg import IntPolynomial, parse_poly
from utils.rignum import XReal, xmax

logger = logging.getLogger(__name__)

PRIMALITY_NOTE = ("sympy.isprime: deterministic below 2^64, "
                  "Baillie-PSW with no known counterexample above")
COUNT_METHODS = ('sieve', 'isprime')
# the simple double sieve holds every prime up to 2N + 1 in memory
_SIMPLE_SG_LIMIT = 10 ** 8
_INT64_SAFE = 2 ** 62


# -- sifted sets ---------------------------------------------------------

@dataclass(frozen=True)
class SiftInstance:
    """The window {F(n) : x - y < n <= x} sifted by the primes below z, given through z^2."""

    poly: IntPolynomial
    x: int
    y: int
    z_squared: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'z_squared', Fraction(self.z_squared))
        if self.y < 1:
            raise InputError(f"window length must be positive, got {self.y}")
        if self.z_squared < 1:
            raise InputError("sifting limit z must be at least 1")
        if abs(self.x) >= _INT64_SAFE or abs(self.x - self.y) >= _INT64_SAFE:
            raise InputError("window must stay within 64-bit integers")

    @property
    def window(self) -> np.ndarray:
        return np.arange(self.x - self.y + 1, self.x + 1, dtype=np.int64)

    @property
    def sifting_primes(self) -> List[int]:
        """Primes p < z, that is p^2 < z^2."""
        limit = math.isqrt(math.ceil(self.z_squared)) + 1
        return [p for p in primes_up_to(limit).tolist() if p * p < self.z_squared]

    def to_json(self) -> Dict[str, Any]:
        return {'F': str(self.poly), 'x': self.x, 'y': self.y, 'z_squared': str(self.z_squared)}


def _residues(F: IntPolynomial, n: np.ndarray, m: int) -> np.ndarray:
    """F(n) mod m for every entry of n; needs m^2 below 2^63."""
    r = n % m
    acc = np.zeros_like(r)
    for a in reversed(F.coeffs):
        acc = (acc * r + (a % m)) % m
    return acc


def sift_exact(instance: SiftInstance) -> int:
    """#{n in the window : F(n) has no prime factor p < z}, by trial division."""
    if instance.y > SIFT_MAX_Y or instance.z_squared > SIFT_MAX_Z ** 2:
        raise OracleError(f"sift oracle is limited to y <= {SIFT_MAX_Y} and z <= {SIFT_MAX_Z}")
    n = instance.window
    survivors = np.ones(len(n), dtype=bool)
    for p in instance.sifting_primes:
        survivors &= _residues(instance.poly, n, p) != 0
    return int(np.count_nonzero(survivors))


def _squarefree(primes: Sequence[int], fits: Callable[[int], bool]) -> Iterator[Tuple[int, Tuple[int, ...]]]:
    """Squarefree d built from ascending primes with fits(d), and their prime factors."""
    stack = [(1, 0, ())]
    while stack:
        d, start, factors = stack.pop()
        yield d, factors
        for i in range(start, len(primes)):
            nd = d * primes[i]
            if not fits(nd):
                break
            stack.append((nd, i + 1, factors + (primes[i],)))


@dataclass(frozen=True)
class SieveDensities:
    """Exact W(z) = prod (1 - w(p)/p) and G(z) = sum over squarefree d < z of g(d)."""

    w: Fraction
    g: Fraction
    omega: Dict[int, int]


def exact_densities(instance: SiftInstance) -> SieveDensities:
    """
    W(z) and G(z) as exact rationals with w(p) = rho_F(p).

    Raises:
        DomainError: w(p) = p for a prime p < z, where g(p) is undefined
    """
    omega = {p: rho(instance.poly, p) for p in instance.sifting_primes}
    for p, w in omega.items():
        if w >= p:
            raise DomainError(f"w({p}) = {p}: g({p}) is undefined")
    w_total = Fraction(1)
    for p, w in omega.items():
        w_total *= Fraction(p - w, p)
    g_p = {p: Fraction(w, p - w) for p, w in omega.items()}
    primes = sorted(omega)
    g_total = Fraction(0)
    for _, factors in _squarefree(primes, lambda d: d * d < instance.z_squared):
        g_total += math.prod((g_p[p] for p in factors), start=Fraction(1))
    return SieveDensities(w_total, g_total, omega)


@dataclass(frozen=True)
class SelbergCheck:
    instance: SiftInstance
    sifted: int
    densities: SieveDensities

    @property
    def main(self) -> Fraction:
        return Fraction(self.instance.y) / self.densities.g

    @property
    def error(self) -> Fraction:
        return self.instance.z_squared / self.densities.w ** 3

    @property
    def rhs(self) -> Fraction:
        return self.main + self.error

    @property
    def passed(self) -> bool:
        return self.sifted <= self.rhs

    def to_json(self) -> Dict[str, Any]:
        return {
            'instance': self.instance.to_json(),
            'sifted': self.sifted,
            'W': str(float(self.densities.w)),
            'G': str(float(self.densities.g)),
            'main_term': repr(float(self.main)),
            'rhs': repr(float(self.rhs)),
            'passed': self.passed,
        }


def selberg_inequality_check(instance: SiftInstance) -> SelbergCheck:
    """S(A, P, z) <= y/G(z) + z^2/W(z)^3, both sides exact."""
    check = SelbergCheck(instance, sift_exact(instance), exact_densities(instance))
    if not check.passed:
        logger.error("Selberg inequality fails for %s: S = %d > %s",
                     instance.to_json(), check.sifted, float(check.rhs))
    return check


def random_instances(count: int, seed: int = 0, max_degree: int = 3, max_y: int = 10 ** 6,
                     max_z: int = 200) -> List[SiftInstance]:
    """Random sift instances whose polynomial has no fixed prime divisor below z."""
    rng = np.random.default_rng(seed)
    out: List[SiftInstance] = []
    while len(out) < count:
        degree = int(rng.integers(1, max_degree + 1))
        coeffs = [int(c) for c in rng.integers(-20, 21, size=degree)] + [int(rng.integers(1, 6))]
        F = IntPolynomial.from_coeffs(coeffs)
        y = int(rng.integers(1, max_y + 1))
        x = y + int(rng.integers(0, 10 ** 6))
        z_squared = int(rng.integers(4, max_z * max_z + 1))
        instance = SiftInstance(F, x, y, Fraction(z_squared))
        if all(rho(F, p) < p for p in instance.sifting_primes):
            out.append(instance)
    return out


@dataclass(frozen=True)
class RemainderRecord:
    """#A_d against rho(d) y/d for one squarefree d."""

    d: int
    count: int
    rho: int
    y: int

    @property
    def remainder(self) -> Fraction:
        return self.count - Fraction(self.rho * self.y, self.d)

    @property
    def within(self) -> bool:
        return abs(self.remainder) <= self.rho

    def to_json(self) -> Dict[str, Any]:
        return {'d': self.d, 'count': self.count, 'rho': self.rho,
                'remainder': str(self.remainder), 'within': self.within}


def _crt_roots(factors: Tuple[int, ...], roots: Dict[int, List[int]]) -> List[int]:
    if not factors:
        return [0]
    lists = [roots[p] for p in factors]
    return [int(crt(list(factors), list(combo))[0]) for combo in itertools.product(*lists)]


def _residue_count(x: int, y: int, r: int, d: int) -> int:
    """#{x - y < n <= x : n = r mod d}."""
    return (x - r) // d - (x - y - r) // d


def remainder_records(instance: SiftInstance, moduli: Optional[Sequence[int]] = None,
                      limit: int = REMAINDER_MAX_D) -> List[RemainderRecord]:
    """
    Records for squarefree d < z^2 dividing P(z), or for the given moduli.

    #A_d comes from the roots of F modulo d (CRT over the prime roots);
    when d y is small enough it is recounted directly and both must agree.

    Raises:
        OracleError: the two counts disagree
    """
    primes = instance.sifting_primes
    roots = {p: roots_mod_p(instance.poly, p) for p in primes}
    if moduli is None:
        bound = min(instance.z_squared, Fraction(limit))
        items = list(_squarefree(primes, lambda d: d < bound))
    else:
        items = []
        for d in moduli:
            factors = tuple(int(p) for p in primes_up_to(d).tolist() if d % p == 0)
            if math.prod(factors) != d:
                raise InputError(f"{d} is not squarefree")
            for p in factors:
                roots.setdefault(p, roots_mod_p(instance.poly, p))
            items.append((d, factors))

    records = []
    for d, factors in sorted(items):
        residues = _crt_roots(factors, roots)
        count = sum(_residue_count(instance.x, instance.y, r, d) for r in residues)
        if d * instance.y <= DIRECT_COUNT_BUDGET:
            direct = int(np.count_nonzero(_residues(instance.poly, instance.window, d) == 0))
            if direct != count:
                logger.error("#A_%d: root count %d, direct count %d", d, count, direct)
                raise OracleError(f"#A_{d} disagrees between root and direct counts")
        records.append(RemainderRecord(d, count, len(residues), instance.y))
    return records


# -- prime-tuple counts ---------------------------------------------------

@dataclass(frozen=True)
class CountResult:
    what: str
    x: int
    y: int
    count: int
    methods: Tuple[str, ...]
    prediction: Optional[float] = None
    note: str = PRIMALITY_NOTE

    def to_json(self) -> Dict[str, Any]:
        return {
            'what': self.what,
            'x': self.x,
            'y': self.y,
            'count': self.count,
            'methods': list(self.methods),
            'bateman_horn': repr(self.prediction) if self.prediction is not None else None,
            'primality': self.note,
        }


def _value_bound(F: IntPolynomial, lo: int, hi: int) -> int:
    m = max(abs(lo), abs(hi))
    return sum(abs(a) * m ** j for j, a in enumerate(F.coeffs))


def _values_int64(F: IntPolynomial, n: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(n)
    for a in reversed(F.coeffs):
        acc = acc * n + a
    return acc


def _root_table(F: IntPolynomial, limit: int) -> List[Tuple[int, List[int]]]:
    return [(p, roots_mod_p(F, p)) for p in primes_up_to(limit).tolist()]


def _sieve_mask(F: IntPolynomial, table, lo: int, hi: int) -> np.ndarray:
    """n in [lo, hi] with F(n) prime: composite values carry a root of F modulo a prime <= sqrt."""
    values = _values_int64(F, np.arange(lo, hi + 1, dtype=np.int64))
    mask = values >= 2
    for p, residues in table:
        for r in residues:
            start = (r - lo) % p
            mask[start::p] &= values[start::p] == p
    return mask


def _isprime_mask(polys: Sequence[IntPolynomial], lo: int, hi: int) -> np.ndarray:
    return np.fromiter((all(isprime(F(n)) for F in polys) for n in range(lo, hi + 1)),
                       dtype=bool, count=hi - lo + 1)


def _chunks(lo: int, hi: int) -> List[Tuple[int, int]]:
    return [(a, min(a + SEGMENT_SIZE - 1, hi)) for a in range(lo, hi + 1, SEGMENT_SIZE)]


def _count(polys: Sequence[IntPolynomial], lo: int, hi: int, method: str, workers: int) -> int:
    if hi < lo:
        return 0
    if method == 'isprime':
        def work(chunk):
            return int(np.count_nonzero(_isprime_mask(polys, *chunk)))
    else:
        tables = []
        for F in polys:
            bound = _value_bound(F, lo, hi)
            if bound >= _INT64_SAFE:
                raise OracleError(f"values of {F} on [{lo}, {hi}] overflow 64-bit integers")
            limit = math.isqrt(bound)
            if limit > ROOT_SIEVE_LIMIT:
                raise OracleError(f"root sieve for {F} needs primes up to {limit}")
            tables.append(_root_table(F, limit))

        def work(chunk):
            mask = np.ones(chunk[1] - chunk[0] + 1, dtype=bool)
            for F, table in zip(polys, tables):
                mask &= _sieve_mask(F, table, *chunk)
            return int(np.count_nonzero(mask))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return sum(pool.map(work, _chunks(lo, hi)))


def count_window(system: PolySystem, x: int, y: int, *, prime_n: bool = False, method: str = 'sieve',
                 cross_check: bool = False, workers: int = WORKERS) -> CountResult:
    """
    #{x - y < n <= x : every F_i(n) prime}, restricted to prime n when ``prime_n``.

    Args:
        system: Polynomials F_1..F_g
        x, y: Window (x - y, x]
        prime_n: Count only prime n (the quantity behind the shifted bound)
        method: 'sieve' (roots modulo primes) or 'isprime'
        cross_check: Run both methods and require agreement
        workers: Threads over window segments

    Raises:
        OracleError: limits exceeded or the two methods disagree
    """
    if method not in COUNT_METHODS:
        raise InputError(f"count method must be one of {', '.join(COUNT_METHODS)}")
    if x > COUNT_MAX_N:
        raise OracleError(f"counting is limited to n <= {COUNT_MAX_N}")
    if y < 1:
        raise InputError("window length must be positive")
    polys = list(system.factors)
    if prime_n:
        polys.append(IntPolynomial((0, 1), system.factors[0].variable))
    lo, hi = x - y + 1, x
    methods = COUNT_METHODS if cross_check else (method,)
    counts = {m: _count(polys, lo, hi, m, workers) for m in methods}
    if len(set(counts.values())) > 1:
        logger.error("Count mismatch on (%d, %d] for %s: %s", lo - 1, hi, system.label, counts)
        raise OracleError(f"counting methods disagree: {counts}")
    what = f"{'prime n, ' if prime_n else ''}{system.label}"
    return CountResult(what, x, y, counts[methods[0]], tuple(methods))


def count_pi_F(system: PolySystem, n: int, *, cross_check: bool = False, prediction: bool = False,
               method: str = 'sieve', workers: int = WORKERS) -> CountResult:
    """pi_F(n) = #{1 <= k <= n : every F_i(k) prime}, optionally beside the Bateman-Horn curve."""
    if n < 1:
        return CountResult(f"pi_F, {system.label}", n, max(n, 0), 0, (method,))
    result = count_window(system, n, n, method=method, cross_check=cross_check, workers=workers)
    estimate = bateman_horn_prediction(system, n) if prediction else None
    return CountResult(f"pi_F, {system.label}", n, n, result.count, result.methods, estimate)


def _sg_segment(lo: int, hi: int, base: np.ndarray) -> int:
    """Sophie Germain primes p with lo <= p < hi."""
    p_mask = segment_mask(lo, hi, base)
    q_mask = segment_mask(2 * lo + 1, 2 * hi, base)
    return int(np.count_nonzero(p_mask & q_mask[::2]))


def sophie_germain_count(n: int, method: str = 'segmented', workers: int = WORKERS) -> int:
    """#{p <= n : p and 2p + 1 prime}."""
    if n > SG_MAX_N:
        raise OracleError(f"Sophie Germain counts are limited to N <= {SG_MAX_N}")
    if n < 2:
        return 0
    if method == 'simple':
        if n > _SIMPLE_SG_LIMIT:
            raise OracleError(f"the simple double sieve is limited to N <= {_SIMPLE_SG_LIMIT}")
        primes = primes_up_to(2 * n + 1)
        candidates = primes[primes <= n]
        return int(np.count_nonzero(np.isin(2 * candidates + 1, primes)))
    if method != 'segmented':
        raise InputError(f"unknown Sophie Germain method {method!r}")
    base = simple_sieve(math.isqrt(2 * n + 1) + 1)
    bounds = [(lo, min(lo + SEGMENT_SIZE, n + 1)) for lo in range(2, n + 1, SEGMENT_SIZE)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return sum(pool.map(lambda b: _sg_segment(b[0], b[1], base), bounds))


def bateman_horn_prediction(system: PolySystem, n: int, singular: Optional[float] = None) -> float:
    """
    S / prod deg F_i * integral_2^n dt / log^g t, with S the singular series.

    Informational only; the integral is split at powers of ten.
    """
    if n <= 2:
        return 0.0
    if singular is None:
        singular = singular_series(system, cutoff=10 ** 5).estimate
    g = system.g
    points = [2] + [10 ** j for j in range(1, len(str(n))) if 10 ** j < n] + [n]
    integral = mpmath.quad(lambda t: mpmath.log(t) ** -g, points)
    return float(integral) * singular / math.prod(F.degree for F in system.factors)


# -- prime-sum envelopes ---------------------------------------------------

@dataclass(frozen=True)
class EnvelopeSample:
    w: int
    z: int
    s: Fraction = Fraction(0)
    k: int = 2


DEFAULT_SAMPLES = tuple(
    EnvelopeSample(w, z, Fraction(s), k)
    for w, z in ((2, 10 ** 3), (100, 10 ** 5), (10 ** 3, 10 ** 6))
    for s in ('0', '1/2', '1')
    for k in (2, 3, 4)
)


@dataclass(frozen=True)
class EnvelopeRecord:
    """One inequality instance value <= bound; bound None stands for a bound beyond float range."""

    check: str
    sample: EnvelopeSample
    value: float
    bound: Optional[float]
    passed: bool
    note: str = ''

    def to_json(self) -> Dict[str, Any]:
        return {
            'check': self.check,
            'w': self.sample.w,
            'z': self.sample.z,
            's': str(self.sample.s),
            'k': self.sample.k,
            'value': repr(self.value),
            'bound': repr(self.bound) if self.bound is not None else 'huge',
            'passed': self.passed,
            'note': self.note,
        }


@dataclass
class EnvelopeReport:
    system: str
    records: List[EnvelopeRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> List[EnvelopeRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self) -> Dict[str, Any]:
        return {
            'system': self.system,
            'passed': self.passed,
            'checked': len(self.records),
            'failures': [r.to_json() for r in self.failures],
            'records': [r.to_json() for r in self.records],
        }


def _fractions(value) -> Tuple[Fraction, Fraction]:
    lo, hi = value._mpi_
    return Fraction(*map(int, libmp.to_rational(lo))), Fraction(*map(int, libmp.to_rational(hi)))


def _floor_of(bound: XReal) -> Optional[Fraction]:
    """Lower end of a positive bound, None when it exceeds the enclosure range."""
    try:
        return bound.fraction_bounds()[0]
    except RangeError:
        return None


def _record(check: str, sample: EnvelopeSample, value: Fraction, bound: XReal, note: str = '') -> EnvelopeRecord:
    floor = _floor_of(bound)
    passed = floor is None or value <= floor
    if not passed:
        logger.error("Envelope %s fails at w=%d z=%d: %s > %s", check, sample.w, sample.z,
                     float(value), float(floor))
    return EnvelopeRecord(check, sample, float(value), float(floor) if floor is not None else None,
                          passed, note)


def _magnitude(bracket: Tuple[Fraction, Fraction]) -> Fraction:
    return max(abs(bracket[0]), abs(bracket[1]))


def _shift(bracket: Tuple[Fraction, Fraction], by: Tuple[Fraction, Fraction]) -> Tuple[Fraction, Fraction]:
    """bracket - by, outward."""
    return bracket[0] - by[1], bracket[1] - by[0]


def lemma_envelope_checks(system: PolySystem, params: SieveParams,
                          samples: Sequence[EnvelopeSample] = DEFAULT_SAMPLES) -> EnvelopeReport:
    """
    Check the prime-sum inequalities behind m0, m1 and L_F with w = rho_F.

    Prime sums are exact up to a float64 allowance and compared with the
    lower end of each bound, so a pass is rigorous. Checks that do not
    depend on s or k run once per (w, z).
    """
    ctx = params.ctx
    iv = ctx.iv
    kappa, a1, a2, big_l = params.kappa, params.a1, params.a2, params.l
    report = EnvelopeReport(system.label)
    seen = set()

    def once(key) -> bool:
        if key in seen:
            return False
        seen.add(key)
        return True

    for sample in samples:
        w, z = sample.w, sample.z
        if not 2 <= w <= z:
            raise InputError(f"envelope samples need 2 <= w <= z, got w={w}, z={z}")
        lw = ctx.log_of(w)
        lw_iv = iv.ln(ctx.interval(w))
        primes = primes_between(w, z)
        p = primes.astype(np.float64)
        omega = system.rho_array(primes).astype(np.float64)
        g = omega / (p - omega)

        if once(('eq5', w, z)):
            total = float_sum(omega / p)
            if w == z:
                log_term = (Fraction(0), Fraction(0))
            else:
                log_term = _fractions(kappa * iv.ln(iv.ln(ctx.interval(z)) / lw_iv))
            middle = _shift(total, log_term)
            report.records.append(_record('eq5_lower', sample, -middle[0], big_l / lw))
            report.records.append(_record('eq5_upper', sample, middle[1], a2 / lw))

        if once(('exp1', w, z, sample.s)):
            closed_primes = primes_between(w, z + 1)
            closed = closed_primes.astype(np.float64)
            omega_c = system.rho_array(closed_primes).astype(np.float64)
            s = float(sample.s)
            terms = np.concatenate([omega_c / (closed - omega_c) / closed ** s, -kappa / closed ** (s + 1)])
            u = a2 / lw
            bound = (xmax(u + params.a1a2 / lw * (kappa + u), big_l / lw)
                     + Fraction(3 * kappa, 2) / (lw * lw))
            report.records.append(_record('exp1', sample, _magnitude(float_sum(terms)), bound))

        if w < z and once(('exp2', w, z, sample.k)):
            k = sample.k
            bound = a1 ** k * a2 ** (k - 1) / lw ** (k - 1) * (kappa + a2 / lw)
            report.records.append(_record('exp2', sample, float_sum(g ** k)[1], bound))

        if once(('exp3', z)):
            start = math.isqrt(z)
            start += start * start < z
            upper = primes_between(start, z + 1)
            q = upper.astype(np.float64)
            om = system.rho_array(upper).astype(np.float64)
            terms = om / (q - om) * om * np.log(q) / q
            report.records.append(_record('exp3', sample, float_sum(terms)[1], m1(z, 1, params),
                                          note='x = z, d = 1'))

        if once(('smallx', z)):
            below = primes_between(2, z)
            q = below.astype(np.float64)
            terms = system.rho_array(below).astype(np.float64) * np.log(q) / q
            log_z = _fractions(system.g * iv.ln(ctx.interval(z)))
            bound = max(system.g, system.degree - 1) * ctx.log_of(z)
            report.records.append(_record('smallx', sample, _magnitude(_shift(float_sum(terms), log_z)),
                                          bound, note='x = z'))

        if w < z and once(('lf', w, z)):
            residual = Fraction(lf_empirical_check(system, w, z))
            report.records.append(_record('lf', sample, residual, big_l))

        if 100 <= w < z and once(('rosser', w, z)):
            residual = Fraction(reciprocal_sum_residual(w, z))
            report.records.append(_record('rosser', sample, residual, ctx.real(Fraction(5, 2)),
                                          note='sanity envelope, float accuracy'))

    return report


# -- root-count identities ---------------------------------------------------

@dataclass
class RhoCheckReport:
    checked: Dict[str, int] = field(default_factory=dict)
    mismatches: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.mismatches.values())

    def to_json(self) -> Dict[str, Any]:
        return {'passed': self.passed, 'checked': dict(self.checked),
                'mismatches': {k: v[:50] for k, v in self.mismatches.items()}}


def _random_factor(rng: np.random.Generator) -> IntPolynomial:
    degree = int(rng.integers(1, 3))
    coeffs = [int(c) for c in rng.integers(-5, 6, size=degree)] + [int(rng.integers(1, 3))]
    return IntPolynomial.from_coeffs(coeffs)


def _random_pairs(count: int, seed: int) -> List[PolySystem]:
    rng = np.random.default_rng(seed)
    systems: List[PolySystem] = []
    attempts = 0
    while len(systems) < count:
        attempts += 1
        if attempts > 100 * count:
            raise OracleError("could not draw enough valid two-factor systems")
        try:
            systems.append(PolySystem.from_polys([_random_factor(rng), _random_factor(rng)]))
        except InputError:
            continue
    return systems


def rho_identity_checks(legendre_limit: int = 10 ** 6, multiplicative_limit: int = 10 ** 4,
                        split_systems: int = 20, split_limit: int = 10 ** 4, seed: int = 0,
                        polys: Sequence[str] = ('k^2 + 3', 'k^3 - 5')) -> RhoCheckReport:
    """
    rho_F(p) = 1 + (-3/p) for k^2 + 3 past 3, multiplicativity of rho on
    squarefree moduli against brute force, and additivity of rho over the
    factors of random two-factor systems for p above the discriminant.
    """
    report = RhoCheckReport()

    F0 = parse_poly('k^2 + 3')
    primes = primes_between(5, legendre_limit)
    values = rho_array(F0, primes)
    bad = [{'p': p, 'rho': int(v)} for p, v in zip(primes.tolist(), values.tolist())
           if v != 1 + legendre(-3, p)]
    report.checked['legendre'] = len(primes)
    report.mismatches['legendre'] = bad

    bad = []
    moduli = [d for d in range(1, multiplicative_limit + 1) if mobius(d) != 0]
    for text in polys:
        F = parse_poly(text)
        for d in moduli:
            direct = int(np.count_nonzero(_residues(F, np.arange(d, dtype=np.int64), d) == 0))
            if direct != rho_squarefree(F, d):
                bad.append({'F': text, 'd': d, 'direct': direct})
    report.checked['multiplicative'] = len(moduli) * len(polys)
    report.mismatches['multiplicative'] = bad

    bad = []
    checked = 0
    for system in _random_pairs(split_systems, seed):
        for p in primes_between(system.disc.abs_disc + 1, split_limit).tolist():
            checked += 1
            split = system.rho_split(p)
            if split.total != rho(system.product, p):
                bad.append({'system': system.label, 'p': p, 'split': split.total})
    report.checked['split'] = checked
    report.mismatches['split'] = bad

    for name, items in report.mismatches.items():
        if items:
            logger.error("rho identity %s fails in %d cases", name, len(items))
    return report
