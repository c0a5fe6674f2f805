"""
Extended-range real arithmetic with rigorous enclosures.

An XReal keeps an exact sign and an mpmath interval enclosing the natural
logarithm of its magnitude. Magnitudes such as exp(2.8e109) stay
representable, and every operation returns an enclosure of the exact
result, so an up-rounded read-out is never below the true value and a
down-rounded one never above it.

Example:
    ctx = NumericContext(digits=40)
    x = ctx.from_log("1.5e38")
    (x * x).logmag      # encloses 3.0e38
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Tuple, Union

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp.libmpf import to_rational

from utils.errors import DomainError, IndeterminateError, InputError, RangeError, RoundingModeError

logger = logging.getLogger(__name__)

MIN_DIGITS = 15
GUARD_DIGITS = 10
LOG_LIMIT = 10 ** 300
# exp() of a log-magnitude above this would leave the representable range
_EXP_LIMIT = 690
_TINY = 2.0 ** -20
_LOG_LIMIT_MPF = libmp.from_int(LOG_LIMIT)

Exact = Union[int, Fraction, Decimal, str, float]


class Rounding(str, enum.Enum):
    UP = 'up'
    DOWN = 'down'
    NEAREST = 'nearest'


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    INDETERMINATE = None

    @property
    def reliable(self) -> bool:
        return self is not Ordering.INDETERMINATE


def _lo(value):
    return value._mpi_[0]


def _hi(value):
    return value._mpi_[1]


class NumericContext:
    """
    Precision and rounding context for a computation.

    Each context owns its own mpmath interval context, so computations at
    different precisions never share mutable state.
    """

    def __init__(self, digits: int = 40, mode: Union[str, Rounding] = Rounding.UP):
        if int(digits) < MIN_DIGITS:
            raise InputError(f"precision must be at least {MIN_DIGITS} digits, got {digits}")
        self.digits = int(digits)
        self.mode = Rounding(mode)
        self.iv = MPIntervalContext()
        self.iv.dps = self.digits + GUARD_DIGITS

    def __repr__(self) -> str:
        return f"NumericContext(digits={self.digits}, mode={self.mode.value})"

    @property
    def prec(self) -> int:
        return self.iv.prec

    def widened(self, factor: int = 2) -> NumericContext:
        return NumericContext(self.digits * factor, self.mode)

    def with_mode(self, mode: Union[str, Rounding]) -> NumericContext:
        return NumericContext(self.digits, mode)

    # -- intervals -----------------------------------------------------

    def interval(self, value):
        """Enclose an exact number, or adopt an existing mpmath interval."""
        if hasattr(value, '_mpi_'):
            return self.iv.make_mpf(value._mpi_)
        if isinstance(value, XReal):
            return value.enclosure()
        prec = self.prec
        if isinstance(value, int):
            lo = libmp.from_int(value, prec, libmp.round_floor)
            hi = libmp.from_int(value, prec, libmp.round_ceiling)
        else:
            try:
                q = Fraction(value)
            except (TypeError, ValueError) as exc:
                raise InputError(f"Cannot read {value!r} as an exact number") from exc
            lo = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_floor)
            hi = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_ceiling)
        return self.iv.make_mpf((lo, hi))

    def _constant(self, fn):
        prec = self.prec
        return self.iv.make_mpf((fn(prec, libmp.round_floor), fn(prec, libmp.round_ceiling)))

    def _two_power(self, exponent: int):
        """Exact degenerate interval 2**exponent."""
        raw = libmp.from_man_exp(1, exponent)
        return self.iv.make_mpf((raw, raw))

    # -- XReal constructors --------------------------------------------

    def real(self, value) -> XReal:
        if isinstance(value, XReal):
            return value
        return self.from_interval(self.interval(value))

    def from_interval(self, value) -> XReal:
        """XReal enclosing every point of an interval that avoids zero."""
        lo, hi = value._mpi_
        if lo == libmp.fzero and hi == libmp.fzero:
            return self.zero()
        if libmp.mpf_gt(lo, libmp.fzero):
            return XReal(1, self.iv.ln(value), self)
        if libmp.mpf_lt(hi, libmp.fzero):
            return XReal(-1, self.iv.ln(-value), self)
        raise IndeterminateError("sign of value is not determined at working precision")

    def from_log(self, logmag, sign: int = 1) -> XReal:
        """XReal with the given natural-log magnitude."""
        return XReal(sign, self.interval(logmag), self)

    def zero(self) -> XReal:
        return XReal(0, None, self)

    def one(self) -> XReal:
        return XReal(1, self.iv.make_mpf((libmp.fzero, libmp.fzero)), self)

    def pi(self) -> XReal:
        return self.from_interval(self._constant(libmp.mpf_pi))

    def e(self) -> XReal:
        return XReal(1, self.iv.make_mpf((libmp.fone, libmp.fone)), self)

    def ln2(self) -> XReal:
        return self.from_interval(self._constant(libmp.mpf_ln2))

    def euler_gamma(self) -> XReal:
        return self.from_interval(self._constant(libmp.mpf_euler))

    def log_of(self, value: Exact) -> XReal:
        """Natural logarithm of an exact positive number."""
        return self.real(value).log()

    def factorial(self, n: int) -> XReal:
        return self.real(math.factorial(n))


def _same_context(a: XReal, b: XReal) -> None:
    if a.ctx is b.ctx:
        return
    if a.ctx.mode is not b.ctx.mode:
        raise RoundingModeError(
            f"operands carry different rounding modes ({a.ctx.mode.value}, {b.ctx.mode.value})"
        )
    if a.ctx.digits != b.ctx.digits:
        raise RoundingModeError(
            f"operands carry different precisions ({a.ctx.digits}, {b.ctx.digits} digits)"
        )


def _point(ctx: NumericContext, raw):
    return ctx.iv.make_mpf((raw, raw))


def _log1p(ctx: NumericContext, u):
    """Enclosure of log(1 + u) for u >= 0."""
    if u.b < _TINY:
        # u - u^2/2 <= log1p(u) <= u
        lower = u - u * u / 2
        return ctx.iv.make_mpf((_lo(lower), _hi(u)))
    return ctx.iv.ln(1 + u)


def _far_exponent(ctx: NumericContext, t) -> int:
    """Integer m with exp(-t) <= 2**-m once t is far beyond the working precision, else 0."""
    if t > ctx.prec + 64:
        return libmp.to_int(_lo(t), libmp.round_floor)
    return 0


def _log1p_exp_neg_point(ctx: NumericContext, t):
    m = _far_exponent(ctx, t)
    if m:
        return ctx.iv.make_mpf((libmp.fzero, libmp.from_man_exp(1, -m)))
    return _log1p(ctx, ctx.iv.exp(-t))


def _log1p_exp_neg(ctx: NumericContext, delta):
    """Enclosure of log(1 + exp(-delta)); the function decreases in delta."""
    lo = _lo(_log1p_exp_neg_point(ctx, _point(ctx, _hi(delta))))
    hi = _hi(_log1p_exp_neg_point(ctx, _point(ctx, _lo(delta))))
    return ctx.iv.make_mpf((lo, hi))


def _log1m_exp_neg_point(ctx: NumericContext, t):
    m = _far_exponent(ctx, t)
    if m:
        # log(1 - y) >= -2y for y <= 1/2
        return ctx.iv.make_mpf((libmp.from_man_exp(-1, 1 - m), libmp.fzero))
    if t < _TINY:
        # t - t^2/2 <= 1 - exp(-t) <= t
        lower = ctx.iv.ln(t - t * t / 2)
        upper = ctx.iv.ln(t)
        return ctx.iv.make_mpf((_lo(lower), _hi(upper)))
    return ctx.iv.ln(1 - ctx.iv.exp(-t))


def _log1m_exp_neg(ctx: NumericContext, delta):
    """Enclosure of log(1 - exp(-delta)) for delta > 0; the function increases in delta."""
    lo = _lo(_log1m_exp_neg_point(ctx, _point(ctx, _lo(delta))))
    hi = _hi(_log1m_exp_neg_point(ctx, _point(ctx, _hi(delta))))
    return ctx.iv.make_mpf((lo, hi))


def _rational(raw) -> Tuple[int, int]:
    """Numerator and denominator of a raw mpf as Python ints, whatever the mpmath backend."""
    p, q = to_rational(raw)
    return int(p), int(q)


def _raw_to_decimal(raw, digits: int, rounding: str) -> Decimal:
    p, q = _rational(raw)
    with localcontext() as dctx:
        dctx.prec = digits
        dctx.rounding = rounding
        return Decimal(p) / Decimal(q)


def _raw_min(a, b):
    return a if libmp.mpf_le(a, b) else b


def _raw_max(a, b):
    return b if libmp.mpf_le(a, b) else a


class XReal:
    """
    Extended-range real: exact sign plus an enclosure of log|value|.

    Instances are immutable and tied to the NumericContext that created
    them; mixing contexts of different precision or rounding mode raises
    RoundingModeError.
    """

    __slots__ = ('sign', 'logmag', 'ctx')

    def __init__(self, sign: int, logmag, ctx: NumericContext):
        if sign not in (-1, 0, 1):
            raise InputError(f"sign must be -1, 0 or 1, got {sign}")
        if sign:
            lo, hi = logmag._mpi_
            if lo in (libmp.fninf, libmp.fnan) or hi in (libmp.finf, libmp.fnan):
                raise RangeError("log-magnitude is not finite")
            if libmp.mpf_gt(hi, _LOG_LIMIT_MPF) or libmp.mpf_lt(lo, libmp.mpf_neg(_LOG_LIMIT_MPF)):
                raise RangeError("log-magnitude exceeds 1e300")
        object.__setattr__(self, 'sign', sign)
        object.__setattr__(self, 'logmag', logmag if sign else None)
        object.__setattr__(self, 'ctx', ctx)

    def __setattr__(self, name, value):
        raise AttributeError("XReal is immutable")

    def _coerce(self, other) -> XReal:
        if isinstance(other, XReal):
            _same_context(self, other)
            return other
        if isinstance(other, (int, Fraction, Decimal, str, float)):
            return self.ctx.real(other)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> XReal:
        return XReal(-self.sign, self.logmag, self.ctx)

    def __pos__(self) -> XReal:
        return self

    def __abs__(self) -> XReal:
        return XReal(abs(self.sign), self.logmag, self.ctx)

    def __mul__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.sign or not other.sign:
            return self.ctx.zero()
        return XReal(self.sign * other.sign, self.logmag + other.logmag, self.ctx)

    __rmul__ = __mul__

    def __truediv__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.sign:
            raise DomainError("division by zero")
        if not self.sign:
            return self.ctx.zero()
        return XReal(self.sign * other.sign, self.logmag - other.logmag, self.ctx)

    def __rtruediv__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __add__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.sign:
            return self
        if not self.sign:
            return other
        ctx = self.ctx
        if self.sign == other.sign:
            big, small = (self, other) if self.logmag.mid >= other.logmag.mid else (other, self)
            delta = big.logmag - small.logmag
            return XReal(self.sign, big.logmag + _log1p_exp_neg(ctx, delta), ctx)
        return self._cancel(other)

    __radd__ = __add__

    def __sub__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> XReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def _cancel(self, other: XReal) -> XReal:
        """Sum of two values of opposite sign."""
        ctx = self.ctx
        if self.logmag._mpi_ == other.logmag._mpi_:
            if _lo(self.logmag) == _hi(self.logmag):
                return ctx.zero()
            raise IndeterminateError("difference of overlapping magnitudes has undetermined sign")
        delta = self.logmag - other.logmag
        if delta.a > 0:
            big = self
        elif delta.b < 0:
            big, delta = other, -delta
        else:
            raise IndeterminateError("difference of overlapping magnitudes has undetermined sign")
        return XReal(big.sign, big.logmag + _log1m_exp_neg(ctx, delta), ctx)

    def __pow__(self, exponent) -> XReal:
        if isinstance(exponent, int):
            if exponent == 0:
                return self.ctx.one()
            if not self.sign:
                if exponent < 0:
                    raise DomainError("division by zero")
                return self
            sign = self.sign if exponent % 2 else 1
            return XReal(sign, self.logmag * exponent, self.ctx)
        if self.sign <= 0:
            raise DomainError("non-integer power of a non-positive value")
        y = exponent if isinstance(exponent, XReal) else self.ctx.real(exponent)
        _same_context(self, y)
        return XReal(1, self.logmag * y.enclosure(), self.ctx)

    def exp(self) -> XReal:
        if not self.sign:
            return self.ctx.one()
        if self.logmag.b > _EXP_LIMIT:
            raise RangeError("exp() argument exceeds the representable range")
        value = self.ctx.iv.exp(self.logmag)
        return XReal(1, value if self.sign > 0 else -value, self.ctx)

    def log(self) -> XReal:
        if self.sign <= 0:
            raise DomainError("logarithm of a non-positive value")
        return self.ctx.from_interval(self.logmag)

    def sqrt(self) -> XReal:
        if self.sign < 0:
            raise DomainError("square root of a negative value")
        if not self.sign:
            return self
        return XReal(1, self.logmag / 2, self.ctx)

    # -- comparison ----------------------------------------------------

    def compare(self, other) -> Ordering:
        other = self._coerce(other)
        if self.sign != other.sign:
            return Ordering.LESS if self.sign < other.sign else Ordering.GREATER
        if not self.sign:
            return Ordering.EQUAL
        a, b = self.logmag._mpi_, other.logmag._mpi_
        # identical representations compare equal whatever their width
        if self is other or a == b:
            return Ordering.EQUAL
        if libmp.mpf_lt(a[1], b[0]):
            magnitude = Ordering.LESS
        elif libmp.mpf_gt(a[0], b[1]):
            magnitude = Ordering.GREATER
        else:
            return Ordering.INDETERMINATE
        if self.sign > 0:
            return magnitude
        return Ordering.GREATER if magnitude is Ordering.LESS else Ordering.LESS

    def _decided(self, other) -> Ordering:
        order = self.compare(other)
        if order is Ordering.INDETERMINATE:
            raise IndeterminateError("comparison is not decided at working precision")
        return order

    def __lt__(self, other) -> bool:
        return self._decided(other) is Ordering.LESS

    def __gt__(self, other) -> bool:
        return self._decided(other) is Ordering.GREATER

    def __le__(self, other) -> bool:
        return self._decided(other) is not Ordering.GREATER

    def __ge__(self, other) -> bool:
        return self._decided(other) is not Ordering.LESS

    __hash__ = object.__hash__

    # -- read-out ------------------------------------------------------

    def enclosure(self):
        """mpmath interval enclosing the value itself."""
        if not self.sign:
            return self.ctx.iv.make_mpf((libmp.fzero, libmp.fzero))
        if self.logmag.b > _EXP_LIMIT:
            raise RangeError("value too large to enclose directly; use its log-magnitude")
        value = self.ctx.iv.exp(self.logmag)
        return value if self.sign > 0 else -value

    def bounds(self) -> XInterval:
        """Degenerate lower and upper XReal bounds."""
        if not self.sign:
            return XInterval(self, self)
        ctx = self.ctx
        lo = XReal(self.sign, _point(ctx, _lo(self.logmag)), ctx)
        hi = XReal(self.sign, _point(ctx, _hi(self.logmag)), ctx)
        return XInterval(lo, hi) if self.sign > 0 else XInterval(hi, lo)

    def fraction_bounds(self) -> Tuple[Fraction, Fraction]:
        lo, hi = self.enclosure()._mpi_
        return Fraction(*_rational(lo)), Fraction(*_rational(hi))

    def float_bounds(self) -> Tuple[float, float]:
        """Floats that bracket the value."""
        lo, hi = self.fraction_bounds()
        return math.nextafter(float(lo), -math.inf), math.nextafter(float(hi), math.inf)

    def _pick(self, value, rounding: Rounding, digits: int) -> Decimal:
        lo, hi = value._mpi_
        if rounding is Rounding.UP:
            return _raw_to_decimal(hi, digits, ROUND_CEILING)
        if rounding is Rounding.DOWN:
            return _raw_to_decimal(lo, digits, ROUND_FLOOR)
        return _raw_to_decimal(value.mid._mpi_[0], digits, ROUND_HALF_EVEN)

    def decimal(self, rounding: Union[str, Rounding, None] = None, digits: int = None) -> Decimal:
        """Decimal read-out of the value, rounded outward per the mode."""
        rounding = Rounding(rounding or self.ctx.mode)
        return self._pick(self.enclosure(), rounding, digits or self.ctx.digits)

    def log10_magnitude(self, rounding: Union[str, Rounding, None] = None, digits: int = None) -> Decimal:
        """Decimal log10 of |value|, rounded toward the side that keeps the value rigorous."""
        if not self.sign:
            raise DomainError("zero has no log-magnitude")
        rounding = Rounding(rounding or self.ctx.mode)
        if self.sign < 0 and rounding is not Rounding.NEAREST:
            rounding = Rounding.DOWN if rounding is Rounding.UP else Rounding.UP
        ln10 = self.ctx._constant(libmp.mpf_ln10)
        return self._pick(self.logmag / ln10, rounding, digits or self.ctx.digits)

    def to_json(self) -> dict:
        if not self.sign:
            return {'sign': 0, 'log10_magnitude': None}
        return {'sign': self.sign, 'log10_magnitude': str(self.log10_magnitude())}

    def __float__(self) -> float:
        if not self.sign:
            return 0.0
        if self.logmag.b > _EXP_LIMIT:
            return math.copysign(math.inf, self.sign)
        return float(self.decimal(Rounding.NEAREST, 20))

    def __repr__(self) -> str:
        if not self.sign:
            return 'XReal(0)'
        sign = '+' if self.sign > 0 else '-'
        return f"XReal({sign}exp[{libmp.to_str(_lo(self.logmag), 12)}, {libmp.to_str(_hi(self.logmag), 12)}])"

    def __str__(self) -> str:
        if not self.sign:
            return '0'
        if self.logmag.b > _EXP_LIMIT or self.logmag.a < -_EXP_LIMIT:
            sign = '' if self.sign > 0 else '-'
            return f"{sign}exp({libmp.to_str(self.logmag.mid._mpi_[0], 12)})"
        return str(self.decimal(Rounding.NEAREST, 12))


@dataclass(frozen=True)
class XInterval:
    """Closed interval [lo, hi] of extended reals."""

    lo: XReal
    hi: XReal

    def __post_init__(self):
        if self.lo.compare(self.hi) is Ordering.GREATER:
            raise InputError("interval lower end exceeds upper end")

    def contains(self, value) -> bool:
        """True when an exact number provably lies in the interval."""
        q = Fraction(value)
        lo, _ = self.lo.fraction_bounds()
        _, hi = self.hi.fraction_bounds()
        return lo <= q <= hi

    def log_width(self) -> float:
        """log(hi/lo) for a positive interval, rounded up."""
        if self.lo.sign <= 0:
            raise DomainError("log width needs a positive interval")
        return float(Fraction(*_rational(_hi(self.hi.logmag))) - Fraction(*_rational(_lo(self.lo.logmag))))

    def to_json(self) -> dict:
        return {'lo': self.lo.to_json(), 'hi': self.hi.to_json()}


def compare(a: XReal, b) -> Ordering:
    return a.compare(b)


def xmax(a: XReal, b: XReal) -> XReal:
    """Maximum; falls back to an endpoint-wise hull for overlapping positives."""
    order = a.compare(b)
    if order in (Ordering.GREATER, Ordering.EQUAL):
        return a
    if order is Ordering.LESS:
        return b
    if a.sign > 0 and b.sign > 0:
        lo = _raw_max(_lo(a.logmag), _lo(b.logmag))
        hi = _raw_max(_hi(a.logmag), _hi(b.logmag))
        return XReal(1, a.ctx.iv.make_mpf((lo, hi)), a.ctx)
    raise IndeterminateError("maximum is not decided at working precision")


def xmin(a: XReal, b: XReal) -> XReal:
    """Minimum; falls back to an endpoint-wise hull for overlapping positives."""
    order = a.compare(b)
    if order in (Ordering.LESS, Ordering.EQUAL):
        return a
    if order is Ordering.GREATER:
        return b
    if a.sign > 0 and b.sign > 0:
        lo = _raw_min(_lo(a.logmag), _lo(b.logmag))
        hi = _raw_min(_hi(a.logmag), _hi(b.logmag))
        return XReal(1, a.ctx.iv.make_mpf((lo, hi)), a.ctx)
    raise IndeterminateError("minimum is not decided at working precision")
