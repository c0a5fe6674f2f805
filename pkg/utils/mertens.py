"""
Mertens-type prime sums and products.

Short sums are accumulated term by term in mpmath intervals. Longer ones
are accumulated in float64 with ``math.fsum`` and widened by an explicit
allowance per term, which keeps them rigorous as long as numpy's log and
log1p stay within a few units in the last place.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np

from config.settings import EXACT_SUM_LIMIT, MERTENS_LIMIT
from utils.errors import RangeError
from utils.modarith import primes_between, primes_up_to
from utils.rignum import NumericContext, XReal

logger = logging.getLogger(__name__)

# allowance per float64 term, in units of the term's magnitude
ULP_ALLOWANCE = 16 * 2.0 ** -53
EULER_GAMMA_FLOAT = 0.5772156649015329


@dataclass(frozen=True)
class MertensValue:
    x: Fraction
    value: XReal
    prime_cutoff: int


@dataclass(frozen=True)
class VProduct:
    z: Fraction
    exact: Optional[Fraction]
    value: XReal

    @property
    def is_exact(self) -> bool:
        return self.exact is not None


def float_sum(terms: np.ndarray) -> Tuple[Fraction, Fraction]:
    """Rigorous rational bracket of the sum of float64 terms."""
    if len(terms) == 0:
        return Fraction(0), Fraction(0)
    total = math.fsum(terms.tolist())
    slack = ULP_ALLOWANCE * math.fsum(np.abs(terms).tolist()) * (1 + 2.0 ** -40) + 2.0 ** -1074
    return Fraction(total) - Fraction(slack), Fraction(total) + Fraction(slack)


def _bracket_to_interval(ctx: NumericContext, lo: Fraction, hi: Fraction):
    return ctx.iv.make_mpf((ctx.interval(lo)._mpi_[0], ctx.interval(hi)._mpi_[1]))


def _floor(x: Union[int, Fraction, str]) -> int:
    return math.floor(Fraction(x))


def _exact_log_sum(ctx: NumericContext, primes: np.ndarray):
    iv = ctx.iv
    total = iv.mpf(0)
    for p in primes.tolist():
        total += iv.ln(iv.mpf(p)) / p
    return total


def mertens_bar(x, ctx: NumericContext) -> MertensValue:
    """Sum of log(p)/p over primes p <= x."""
    x = Fraction(x)
    if x < 0:
        raise RangeError("mertens_bar needs x >= 0")
    if x > MERTENS_LIMIT:
        raise RangeError(f"direct summation is limited to x <= {MERTENS_LIMIT}")
    cutoff = _floor(x)
    return MertensValue(x, _mertens_cached(cutoff, ctx), cutoff)


@lru_cache(maxsize=64)
def _mertens_cached(cutoff: int, ctx: NumericContext) -> XReal:
    if cutoff < 2:
        return ctx.zero()
    primes = primes_up_to(cutoff)
    small = primes[primes <= EXACT_SUM_LIMIT]
    large = primes[primes > EXACT_SUM_LIMIT]
    total = _exact_log_sum(ctx, small)
    if len(large):
        logger.debug("Summing %d prime logs beyond %d in float64", len(large), EXACT_SUM_LIMIT)
        values = large.astype(np.float64)
        lo, hi = float_sum(np.log(values) / values)
        total = total + _bracket_to_interval(ctx, lo, hi)
    return ctx.from_interval(total)


def mertens_sqrt(n: int, ctx: NumericContext) -> MertensValue:
    """mertens_bar at sqrt(n) for an integer n."""
    return mertens_bar(math.isqrt(n), ctx)


def v_product(z, ctx: Optional[NumericContext] = None) -> VProduct:
    """
    Product of (1 - 1/p) over primes p < z.

    Exact as a rational up to the exact-summation limit; beyond it the
    value is an XReal enclosure and ``exact`` is None.
    """
    z = Fraction(z)
    ctx = ctx or NumericContext()
    primes = _primes_below(z)
    if len(primes) == 0:
        return VProduct(z, Fraction(1), ctx.one())
    if int(primes[-1]) <= EXACT_SUM_LIMIT:
        plist = primes.tolist()
        exact = Fraction(math.prod(p - 1 for p in plist), math.prod(plist))
        return VProduct(z, exact, ctx.real(exact))
    logger.info("v_product(%s) switches to a float64 enclosure", float(z))
    lo, hi = float_sum(np.log1p(-1.0 / primes.astype(np.float64)))
    return VProduct(z, None, ctx.from_log(_bracket_to_interval(ctx, lo, hi)))


def _primes_below(z: Fraction) -> np.ndarray:
    limit = math.ceil(z) - 1
    return primes_up_to(max(limit, 1))


def v_envelope_residual(z: int) -> float:
    """|V(z) e^gamma log z - 1| scaled by log^2 z; at most 1 in the proven range."""
    primes = _primes_below(Fraction(z)).astype(np.float64)
    log_v = math.fsum(np.log1p(-1.0 / primes).tolist())
    log_z = math.log(z)
    return abs(math.exp(log_v + EULER_GAMMA_FLOAT) * log_z - 1) * log_z ** 2


def reciprocal_sum_residual(w: int, z: int) -> float:
    """|sum_{w<=p<z} 1/p - log(log z/log w)| scaled by log^2 w."""
    primes = primes_between(w, z).astype(np.float64)
    total = math.fsum((1.0 / primes).tolist())
    return abs(total - math.log(math.log(z) / math.log(w))) * math.log(w) ** 2
