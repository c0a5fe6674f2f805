import math
from fractions import Fraction

import numpy as np
import pytest
from sympy import primerange

from utils.errors import RangeError
from utils.mertens import (
    float_sum,
    mertens_bar,
    mertens_sqrt,
    reciprocal_sum_residual,
    v_envelope_residual,
    v_product,
)


def encloses(x, value):
    lo, hi = x.fraction_bounds()
    return lo <= value <= hi


def test_float_sum_brackets_the_exact_sum():
    terms = np.full(10, 0.1)
    lo, hi = float_sum(terms)
    exact = 10 * Fraction(0.1)
    assert lo <= exact <= hi
    assert hi - lo < Fraction(1, 10 ** 12)
    assert float_sum(np.array([])) == (0, 0)


def test_mertens_bar_small_values(ctx):
    assert mertens_bar(1, ctx).value.sign == 0
    assert float(mertens_bar(2, ctx).value) == pytest.approx(math.log(2) / 2)
    assert float(mertens_sqrt(12, ctx).value) == pytest.approx(math.log(2) / 2 + math.log(3) / 3)
    assert mertens_bar(Fraction(7, 2), ctx).prime_cutoff == 3


def test_mertens_bar_float_range_matches_exact_range(ctx):
    value = mertens_bar(2 * 10 ** 5, ctx).value
    primes = np.array(list(primerange(2, 2 * 10 ** 5 + 1)), dtype=np.float64)
    assert float(value) == pytest.approx(math.fsum((np.log(primes) / primes).tolist()), rel=1e-12)


def test_mertens_bar_is_monotone(ctx):
    assert mertens_bar(100, ctx).value < mertens_bar(101, ctx).value


def test_mertens_bar_range(ctx):
    with pytest.raises(RangeError):
        mertens_bar(-1, ctx)
    with pytest.raises(RangeError):
        mertens_bar(10 ** 11, ctx)


def test_v_product(ctx):
    assert v_product(3, ctx).exact == Fraction(1, 2)
    assert v_product(10, ctx).exact == Fraction(8, 35)
    assert v_product(2, ctx).exact == 1
    assert encloses(v_product(10, ctx).value, Fraction(8, 35))


def test_v_product_float_range(ctx):
    large = v_product(2 * 10 ** 5, ctx)
    assert not large.is_exact
    assert large.value < v_product(5 * 10 ** 4, ctx).value


def test_envelope_residuals():
    assert v_envelope_residual(10 ** 4) <= 1
    assert reciprocal_sum_residual(10 ** 3, 10 ** 6) <= 1
