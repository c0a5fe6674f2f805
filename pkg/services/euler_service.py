"""
Euler product service for explicit-sieve.

Encloses the singular series prod_p (1 - rho(p)/p)(1 - 1/p)^-kappa of a
polynomial system, and the twin-prime constant prod_{p>2} (1 - 1/(p-1)^2)
through prime zeta values.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np
from mpmath import bernfrac, libmp
from mpmath.ctx_iv import MPIntervalContext
from sympy import mobius

from config.settings import EULER_CUTOFF, WORKERS
from services.constants_service import PolySystem, QfVariant, Regime, lf
from utils.errors import DomainError, InputError
from utils.mertens import float_sum
from utils.modarith import PrimeStream, legendre, primes_up_to
from utils.rignum import NumericContext, XReal

logger = logging.getLogger(__name__)

MAX_CUTOFF = 10 ** 9
MAX_TWIN_DIGITS = 30
# Mertens-type sum of log p / p is within 1/(2 log x) of log x - E from here on
_MERTENS_RANGE = 319
_TWIN_SPLIT = 100


@dataclass(frozen=True)
class ProductInterval:
    lo: XReal
    hi: XReal
    cutoff: int
    method: str
    estimate: float

    @property
    def relative_width(self) -> Decimal:
        """hi/lo - 1 from the outer endpoints, rounded up to six significant digits."""
        lo, _ = self.lo.fraction_bounds()
        _, hi = self.hi.fraction_bounds()
        width = (hi - lo) / lo
        with localcontext() as dctx:
            dctx.prec = 6
            dctx.rounding = ROUND_CEILING
            return Decimal(width.numerator) / Decimal(width.denominator)

    def contains(self, value) -> bool:
        lo, _ = self.lo.fraction_bounds()
        _, hi = self.hi.fraction_bounds()
        return lo <= Fraction(value) <= hi

    def to_json(self) -> Dict[str, Any]:
        return {
            'lo': str(self.lo.decimal('down', 20)),
            'hi': str(self.hi.decimal('up', 20)),
            'cutoff': self.cutoff,
            'tail_method': self.method,
            'estimate': repr(self.estimate),
            'relative_width': str(self.relative_width),
        }


def partial_log_sum(primes: np.ndarray, rho_values: np.ndarray, kappa: int) -> Tuple[Fraction, Fraction]:
    """Rational bracket of sum over the primes of log(1 - rho/p) - kappa log(1 - 1/p)."""
    if len(primes) == 0:
        return Fraction(0), Fraction(0)
    p = primes.astype(np.float64)
    if np.any(rho_values >= primes):
        offending = int(primes[np.argmax(rho_values >= primes)])
        raise DomainError(f"rho(p) = p at p = {offending}: fixed prime divisor")
    terms = np.concatenate([np.log1p(-rho_values.astype(np.float64) / p), -kappa * np.log1p(-1.0 / p)])
    return float_sum(terms)


def _constant_rho_from(system: PolySystem) -> Optional[int]:
    """Smallest bound past which rho(p) = kappa for every prime, when the factors are all linear."""
    if any(F.degree != 1 for F in system.factors):
        return None
    return max(system.disc.abs_disc, system.product.leading, 2)


def _tail_bound(system: PolySystem, kappa: int, cutoff: int, regime: Regime,
                ctx: NumericContext) -> Tuple[Fraction, str]:
    """Bound on |sum over p > cutoff of the log terms|, and the method used."""
    start = _constant_rho_from(system)
    if start is not None and cutoff > start and system.g == kappa:
        # |log(1 - k/p) - k log(1 - 1/p)| <= (k^2 + k)/(2p(p - k)), telescoped
        return Fraction(kappa * kappa + kappa, cutoff - kappa), 'constant_rho'
    if cutoff < _MERTENS_RANGE:
        raise InputError(f"Euler cutoff must be at least {_MERTENS_RANGE} for a general tail")
    d = system.degree
    if cutoff <= d + 1:
        raise InputError("Euler cutoff must exceed the degree")
    logger.info("Bounding the Euler tail past %d through L_F (%s)", cutoff, regime.value)
    big_l = lf(system, regime, ctx, QfVariant.PRINTED)
    _, big_l_hi = big_l.fraction_bounds()
    log_p = Fraction(math.log(cutoff)) * (1 - Fraction(1, 10 ** 12))
    first_order = 2 * (big_l_hi + Fraction(kappa) / log_p) / log_p
    second_order = Fraction(d * d + kappa, cutoff - d)
    return first_order + second_order, 'nagell'


def _segment_sum(system: PolySystem, kappa: int, segment: np.ndarray) -> Tuple[Fraction, Fraction]:
    return partial_log_sum(segment, system.rho_array(segment), kappa)


def singular_series(system: PolySystem, kappa: Optional[int] = None, cutoff: int = EULER_CUTOFF,
                    ctx: Optional[NumericContext] = None, regime: Regime = Regime.UNCONDITIONAL,
                    workers: int = WORKERS) -> ProductInterval:
    """
    Enclose prod_p (1 - rho_F(p)/p)(1 - 1/p)^-kappa.

    Args:
        system: Sieved system; rho is the root count of its product
        kappa: Sieve dimension (defaults to the number of factors)
        cutoff: Primes p <= cutoff are multiplied out
        ctx: Numeric context for the enclosure
        regime: Regime of L_F when a general tail bound is needed
        workers: Threads summing prime segments

    Returns:
        ProductInterval with the tail method recorded
    """
    ctx = ctx or NumericContext()
    kappa = system.kappa if kappa is None else int(kappa)
    regime = Regime(regime)
    if cutoff > MAX_CUTOFF:
        raise InputError(f"Euler cutoff is limited to {MAX_CUTOFF}")
    segments = list(PrimeStream(cutoff).segments())
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        brackets = list(pool.map(lambda seg: _segment_sum(system, kappa, seg), segments))
    lo = sum((b[0] for b in brackets), Fraction(0))
    hi = sum((b[1] for b in brackets), Fraction(0))
    estimate = math.exp(float((lo + hi) / 2))
    tail, method = _tail_bound(system, kappa, cutoff, regime, ctx)
    return _interval_from_logs(ctx, lo - tail, hi + tail, cutoff, method, estimate)


def _interval_from_logs(ctx: NumericContext, log_lo: Fraction, log_hi: Fraction, cutoff: int,
                        method: str, estimate: float) -> ProductInterval:
    lo = ctx.from_log(log_lo).bounds().lo
    hi = ctx.from_log(log_hi).bounds().hi
    return ProductInterval(lo, hi, cutoff, method, estimate)


def product_lower_bound(params) -> XReal:
    """exp(-A1 A2 (1 + kappa + A2)), a lower bound for every singular series."""
    exponent = params.a1a2 * (1 + params.kappa + params.a2)
    return params.ctx.from_log((-exponent).enclosure()).bounds().lo


def legendre_log_sum(cutoff: int) -> Tuple[Fraction, Fraction]:
    """Partial log-sum for k^2 + 3 with rho(p) = 1 + (-3/p) past 3."""
    primes = primes_up_to(cutoff)
    rho_values = np.array([1 if p <= 3 else 1 + legendre(-3, p) for p in primes.tolist()], dtype=np.int64)
    return partial_log_sum(primes, rho_values, 1)


# -- prime zeta acceleration ----------------------------------------------

def _iv_context(digits: int) -> MPIntervalContext:
    iv = MPIntervalContext()
    iv.dps = digits + 30
    return iv


def _symmetric(iv: MPIntervalContext, x):
    """[-|x|, |x|] with |x| rounded up."""
    hi = abs(x)._mpi_[1]
    return iv.make_mpf((libmp.mpf_neg(hi), hi))


def _below(x, eps) -> bool:
    return libmp.mpf_lt(x._mpi_[1], eps._mpi_[0])


def _zeta(iv: MPIntervalContext, s: int, n: int = 40, terms: int = 20):
    """zeta(s) for an integer s >= 2 by Euler-Maclaurin with an explicit remainder."""
    total = iv.mpf(0)
    for k in range(1, n):
        total += iv.mpf(k) ** (-s)
    big_n = iv.mpf(n)
    total += big_n ** (1 - s) / (s - 1) + big_n ** (-s) / 2
    rising = iv.mpf(s)
    power = big_n ** (-s - 1)
    factorial = 2
    last = None
    for j in range(1, terms + 2):
        num, den = bernfrac(2 * j)
        term = iv.mpf(num) / den / factorial * rising * power
        if j == terms + 1:
            last = term
            break
        total += term
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= big_n * big_n
        factorial *= (2 * j + 1) * (2 * j + 2)
    # for real s the remainder is bounded by the first omitted term
    return total + _symmetric(iv, last)


def _tail_power_bound(iv: MPIntervalContext, t: int, p1: int):
    """Upper bound on sum_{p > p1 - 1} p^-t: p1^-t + p1^(1-t)/(t - 1)."""
    p = iv.mpf(p1)
    return p ** (-t) + p ** (1 - t) / (t - 1)


def _log_zeta_rough(iv: MPIntervalContext, t: int, small_primes, eps):
    """log of prod_{p > 100} (1 - p^-t)^-1, which lies in [0, 2 E(t)]."""
    bound = 2 * _tail_power_bound(iv, t, _TWIN_SPLIT + 1)
    if _below(bound, eps):
        return iv.make_mpf((libmp.fzero, bound._mpi_[1]))
    value = iv.ln(_zeta(iv, t))
    for p in small_primes:
        value += iv.ln(1 - iv.mpf(p) ** (-t))
    return value


def _prime_zeta_tail(iv: MPIntervalContext, k: int, small_primes, eps):
    """sum_{p > 100} p^-k by Moebius inversion of log zeta."""
    total = iv.mpf(0)
    n = 1
    while True:
        bound = 2 * _tail_power_bound(iv, n * k, _TWIN_SPLIT + 1)
        if n > 1 and _below(2 * bound, eps):
            # remaining terms: sum_{m >= n} 2 E(mk)/m, geometric in m
            return total + _symmetric(iv, 2 * bound)
        mu = int(mobius(n))
        if mu:
            total += iv.mpf(mu) / n * _log_zeta_rough(iv, n * k, small_primes, eps)
        n += 1


@lru_cache(maxsize=8)
def twin_constant_accelerated(digits: int = 20) -> ProductInterval:
    """
    Enclose prod_{p>2} (1 - 1/(p-1)^2).

    Primes up to 100 are multiplied directly; beyond them
    log(1 - 1/(p-1)^2) = -sum_k (2^k - 2)/k p^-k, and the prime sums
    p^-k are obtained from log zeta through Moebius inversion.
    """
    if digits > MAX_TWIN_DIGITS:
        raise InputError(f"twin constant is implemented up to {MAX_TWIN_DIGITS} digits")
    if digits < 1:
        raise InputError("digits must be positive")
    iv = _iv_context(digits)
    eps = iv.mpf(10) ** (-(digits + 15))
    small_primes = primes_up_to(_TWIN_SPLIT).tolist()

    log_value = iv.mpf(0)
    for p in small_primes[1:]:
        log_value += iv.ln(1 - iv.mpf(1) / (p - 1) ** 2)

    ratio = iv.mpf(2) / (_TWIN_SPLIT + 1)
    k = 2
    while True:
        # sum_{j >= k} (2/101)^j (1 + 101/(j - 1))/j bounds what is left
        remainder = ratio ** k * (1 + iv.mpf(_TWIN_SPLIT + 1) / (k - 1)) / k / (1 - ratio)
        if _below(remainder, eps):
            log_value += iv.make_mpf((libmp.mpf_neg(remainder._mpi_[1]), libmp.fzero))
            break
        coefficient = iv.mpf(2 ** k - 2) / k
        log_value -= coefficient * _prime_zeta_tail(iv, k, small_primes, eps)
        k += 1
    logger.debug("twin constant: %d prime zeta terms at %d digits", k - 2, digits)

    ctx = NumericContext(max(digits + 10, 15))
    value = iv.exp(log_value)
    lo = ctx.from_interval(ctx.iv.make_mpf((value._mpi_[0], value._mpi_[0]))).bounds().lo
    hi = ctx.from_interval(ctx.iv.make_mpf((value._mpi_[1], value._mpi_[1]))).bounds().hi
    return ProductInterval(lo, hi, _TWIN_SPLIT, 'prime_zeta', libmp.to_float(value.mid._mpi_[0]))


def twin_constant_direct(cutoff: int = EULER_CUTOFF, ctx: Optional[NumericContext] = None) -> ProductInterval:
    """Direct product over 2 < p <= cutoff with the constant-rho tail."""
    ctx = ctx or NumericContext()
    primes = primes_up_to(cutoff)[1:]
    p = primes.astype(np.float64)
    lo, hi = float_sum(np.log1p(-1.0 / (p - 1.0) ** 2))
    # 0 <= -log(1 - 1/(p-1)^2) <= 1/(p(p-2)) <= 1/((p-2)(p-1)), telescoped
    tail = Fraction(2, cutoff - 1)
    return _interval_from_logs(ctx, lo - tail, hi, cutoff, 'constant_rho', math.exp(float((lo + hi) / 2)))
