import math
import random
from decimal import Decimal
from fractions import Fraction

import mpmath
import pytest

from utils import rignum
from utils.errors import DomainError, IndeterminateError, InputError, RangeError, RoundingModeError
from utils.rignum import NumericContext, Ordering, XInterval, xmax, xmin


def encloses(x, value):
    lo, hi = x.fraction_bounds()
    return lo <= Fraction(value) <= hi


def test_exact_inputs_are_enclosed(ctx):
    assert encloses(ctx.real(Fraction(1, 3)), Fraction(1, 3))
    assert encloses(ctx.real('2.27'), Fraction('2.27'))
    assert encloses(ctx.real(-7), -7)


def test_arithmetic_encloses_exact_results(ctx):
    a, b = ctx.real(Fraction(3, 7)), ctx.real(Fraction(5, 11))
    assert encloses(a + b, Fraction(3, 7) + Fraction(5, 11))
    assert encloses(a - b, Fraction(3, 7) - Fraction(5, 11))
    assert encloses(a * b, Fraction(15, 77))
    assert encloses(a / b, Fraction(33, 35))
    assert encloses(2 - a, Fraction(11, 7))
    assert encloses(1 / b, Fraction(11, 5))
    assert encloses(a ** 3, Fraction(27, 343))


def test_constants(ctx):
    assert Decimal('3.14159265358') < ctx.pi().decimal('up', 12)
    assert ctx.pi().decimal('down', 12) < Decimal('3.14159265359')
    assert encloses(ctx.ln2().exp(), 2)
    gamma = float(ctx.euler_gamma())
    assert gamma == pytest.approx(0.5772156649015329)


def test_rounding_direction_of_readout(ctx):
    third = ctx.real(Fraction(1, 3))
    assert third.decimal('down', 10) < Decimal(1) / 3 < third.decimal('up', 10)
    assert third.decimal('down', 10) == Decimal('0.3333333333')
    assert third.decimal('up', 10) == Decimal('0.3333333334')


def test_huge_values_live_in_log_space(ctx):
    x = ctx.from_log(Fraction('1.5e38'))
    square = x * x
    assert encloses(square.log(), Fraction('3.0e38'))
    assert float(x) == math.inf
    assert str(x).startswith('exp(')
    with pytest.raises(RangeError):
        x.enclosure()
    with pytest.raises(RangeError):
        x.exp()


def test_log10_magnitude(ctx):
    assert ctx.real(1000).log10_magnitude('down', 8) <= Decimal(3) <= ctx.real(1000).log10_magnitude('up', 8)
    assert ctx.from_log(Fraction(10 ** 6)).log10_magnitude('nearest', 6) == Decimal('434294')


def test_comparisons(ctx):
    assert ctx.real(2) > 1
    assert ctx.real(-3) < ctx.real(1)
    assert ctx.zero() < ctx.real(Fraction(1, 10 ** 30))
    assert ctx.real(5).compare(ctx.real(5)) is Ordering.EQUAL
    assert xmax(ctx.real(2), ctx.real(5)).compare(4) is Ordering.GREATER
    assert xmin(ctx.real(2), ctx.real(5)).compare(3) is Ordering.LESS


def test_undecided_sign_raises(ctx):
    with pytest.raises(IndeterminateError):
        ctx.from_interval(ctx.iv.mpf([-1, 1]))
    with pytest.raises(IndeterminateError):
        ctx.real(2) - ctx.real(2)
    assert (ctx.one() - ctx.one()).sign == 0


def test_domain_errors(ctx):
    with pytest.raises(DomainError):
        ctx.real(-2).log()
    with pytest.raises(DomainError):
        ctx.real(-2).sqrt()
    with pytest.raises(DomainError):
        ctx.real(2) / ctx.zero()


def test_contexts_do_not_mix():
    a = NumericContext(20).real(2)
    b = NumericContext(30).real(3)
    with pytest.raises(RoundingModeError):
        a * b
    c = NumericContext(20, 'down').real(3)
    with pytest.raises(RoundingModeError):
        a + c


def test_context_validation():
    with pytest.raises(InputError):
        NumericContext(10)
    assert NumericContext(20).widened().digits == 40


def test_values_are_immutable(ctx):
    x = ctx.real(2)
    with pytest.raises(AttributeError):
        x.sign = -1


def test_interval_contains(ctx):
    interval = XInterval(ctx.real(Fraction(1, 2)), ctx.real(Fraction(3, 4)))
    assert interval.contains(Fraction(2, 3))
    assert not interval.contains(1)
    with pytest.raises(InputError):
        XInterval(ctx.real(2), ctx.real(1))


def test_identical_enclosures_compare_equal(ctx):
    x = ctx.real(3).log().exp()
    assert x.compare(x) is Ordering.EQUAL
    assert ctx.real(3).log().compare(ctx.real(3).log()) is Ordering.EQUAL
    assert x <= x and x >= x
    assert xmax(x, x) is x


def _leaf(rng):
    value = Fraction(rng.randint(1, 50), rng.randint(1, 20))
    return -value if rng.random() < 0.3 else value


def _tree(rng, depth):
    """Random expression as nested tuples over exact rational leaves."""
    if depth == 0 or rng.random() < 0.2:
        return ('leaf', _leaf(rng))
    op = rng.choice(['+', '-', '*', '/', 'exp', 'log', 'sqrt'])
    if op in ('exp', 'log', 'sqrt'):
        return (op, _tree(rng, depth - 1))
    return (op, _tree(rng, depth - 1), _tree(rng, depth - 1))


def _evaluate(node, ctx):
    """(XReal, mpf reference) for a tree, or None where the expression leaves its domain."""
    op = node[0]
    if op == 'leaf':
        q = node[1]
        return ctx.real(q), mpmath.mpf(q.numerator) / q.denominator
    parts = [_evaluate(child, ctx) for child in node[1:]]
    if any(p is None for p in parts):
        return None
    try:
        if op == 'exp':
            (x, rx), = parts
            return (x.exp(), mpmath.exp(rx)) if abs(rx) < 20 else None
        if op == 'log':
            (x, rx), = parts
            return (x.log(), mpmath.log(rx)) if rx > 0 else None
        if op == 'sqrt':
            (x, rx), = parts
            return (x.sqrt(), mpmath.sqrt(rx)) if rx >= 0 else None
        (x, rx), (y, ry) = parts
        if op == '+':
            return x + y, rx + ry
        if op == '-':
            return x - y, rx - ry
        if op == '*':
            return x * y, rx * ry
        return (x / y, rx / ry) if ry != 0 else None
    except (IndeterminateError, DomainError):
        return None


def _reference_decimal(value) -> Decimal:
    return Decimal(mpmath.nstr(value, 70, min_fixed=-math.inf, max_fixed=math.inf))


def test_readouts_contain_random_expressions(ctx):
    rng = random.Random(7)
    checked = 0
    with mpmath.workdps(80):
        for _ in range(300):
            result = _evaluate(_tree(rng, 4), ctx)
            if result is None:
                continue
            x, exact = result
            if x.sign == 0 or abs(exact) > 10 ** 100:
                continue
            reference = _reference_decimal(exact)
            assert x.decimal('down', 30) <= reference <= x.decimal('up', 30)
            checked += 1
    assert checked > 100


def test_precision_increase_keeps_enclosures_overlapping():
    low, high = NumericContext(40), NumericContext(60)
    rng = random.Random(11)
    for _ in range(100):
        tree = _tree(rng, 4)
        a, b = _evaluate(tree, low), _evaluate(tree, high)
        if a is None or b is None or a[0].sign == 0 or b[0].sign == 0:
            continue
        x, y = a[0], b[0]
        if abs(a[1]) > 10 ** 100:
            continue
        assert x.decimal('down', 30) <= y.decimal('up', 30)
        assert y.decimal('down', 30) <= x.decimal('up', 30)
        low_lo, low_hi = x.fraction_bounds()
        high_lo, high_hi = y.fraction_bounds()
        assert max(low_lo, high_lo) <= min(low_hi, high_hi)


class _ForeignInt:
    """Integer type of another arithmetic backend: int() works, Decimal() does not."""

    def __init__(self, value):
        self.value = value

    def __int__(self):
        return self.value


def test_readouts_accept_backend_integers(ctx, monkeypatch):
    native = rignum.to_rational
    monkeypatch.setattr(rignum, 'to_rational', lambda raw: tuple(_ForeignInt(v) for v in native(raw)))
    third = ctx.real(Fraction(1, 3))
    assert third.decimal('down', 10) == Decimal('0.3333333333')
    assert third.decimal('up', 10) == Decimal('0.3333333334')
    lo, hi = third.fraction_bounds()
    assert lo <= Fraction(1, 3) <= hi
    assert third.to_json()
