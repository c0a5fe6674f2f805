from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest

from services.constants_service import PolySystem, Regime
from services.euler_service import (
    legendre_log_sum,
    partial_log_sum,
    product_lower_bound,
    singular_series,
    twin_constant_accelerated,
    twin_constant_direct,
)
from services.sieve_service import SieveParams
from utils.errors import DomainError, InputError
from utils.modarith import primes_up_to, rho_array
from utils.polyalg import parse_poly

TWIN = Fraction('0.660161815846869573927812110014555778432623360284733413319448')


def test_twin_constant_accelerated():
    interval = twin_constant_accelerated(20)
    assert interval.contains(TWIN)
    assert str(interval.lo.decimal('down', 10)) == '0.6601618158'
    assert interval.relative_width < 1e-18
    assert interval.method == 'prime_zeta'


def test_twin_constant_digit_limits():
    with pytest.raises(InputError):
        twin_constant_accelerated(31)
    with pytest.raises(InputError):
        twin_constant_accelerated(0)


def test_direct_twin_constant_agrees(ctx):
    direct = twin_constant_direct(10 ** 5, ctx)
    assert direct.contains(TWIN)
    assert direct.relative_width < 1e-4
    assert direct.method == 'constant_rho'


def test_sophie_germain_singular_series_is_twice_twin(ctx, sophie_germain):
    interval = singular_series(sophie_germain, cutoff=10 ** 5, ctx=ctx, workers=2)
    assert interval.method == 'constant_rho'
    assert interval.contains(2 * TWIN)


def test_general_tail_needs_larger_cutoff(ctx, f0):
    with pytest.raises(InputError):
        singular_series(f0, cutoff=200, ctx=ctx)
    with pytest.raises(InputError):
        singular_series(f0, cutoff=10 ** 10, ctx=ctx)


def test_f0_singular_series_above_generic_lower_bound(ctx, f0):
    interval = singular_series(f0, cutoff=10 ** 4, ctx=ctx, regime=Regime.GRH)
    assert interval.method == 'nagell'
    params = SieveParams.for_system(f0, Regime.GRH, ctx)
    assert product_lower_bound(params) < interval.lo
    assert interval.lo < interval.hi
    payload = interval.to_json()
    assert payload['tail_method'] == 'nagell'
    assert payload['cutoff'] == 10 ** 4


def test_cutoffs_nest(ctx, f0):
    small = singular_series(f0, cutoff=10 ** 4, ctx=ctx, regime=Regime.GRH)
    large = singular_series(f0, cutoff=10 ** 5, ctx=ctx, regime=Regime.GRH)
    assert small.lo < large.lo
    assert large.hi < small.hi


def test_legendre_shortcut_matches_root_counts():
    primes = primes_up_to(10 ** 4)
    direct = partial_log_sum(primes, rho_array(parse_poly('k^2 + 3'), primes), 1)
    assert legendre_log_sum(10 ** 4) == direct


def test_partial_log_sum_rejects_fixed_divisor():
    primes = np.array([2, 3, 5], dtype=np.int64)
    with pytest.raises(DomainError):
        partial_log_sum(primes, np.array([1, 3, 0], dtype=np.int64), 1)
    assert partial_log_sum(primes[:0], primes[:0], 1) == (0, 0)


def test_linear_system_tail(ctx):
    system = PolySystem.parse(['2k + 1'])
    interval = singular_series(system, cutoff=10 ** 4, ctx=ctx)
    assert interval.method == 'constant_rho'
    # prod over p > 2 of (1 - 1/p)^(-1)(1 - 1/p) is 1, and p = 2 contributes 2
    assert interval.contains(2)


def test_relative_width_survives_high_precision(ctx):
    width = twin_constant_accelerated(20).relative_width
    assert isinstance(width, Decimal)
    assert 0 < width < Decimal('1e-18')
    assert twin_constant_accelerated(20).to_json()['relative_width'] != '0.0'
