import math
from fractions import Fraction

import pytest

from services.constants_service import Regime
from services.sieve_service import (
    GridPoint,
    SieveParams,
    assemble_bound,
    check_conditions,
    combined_coefficient,
    find_minimal_x_for_system,
    g_reciprocal_bound,
    log_mfrak,
    log_z0,
    m0,
    m0_by_k0,
    m1,
    m4,
    m9,
    sieve_tower,
    threshold_report,
    w_reciprocal_bound,
    w_upper_bound,
)
from utils.errors import ConditionFailure, DomainError, InputError
from utils.polyalg import parse_poly
from utils.rignum import Ordering


@pytest.fixture
def toy(ctx):
    return SieveParams(1, 2, ctx.real(1), ctx.real(1), k0=2)


def test_params_validation(ctx):
    one = ctx.real(1)
    with pytest.raises(InputError):
        SieveParams(0, 2, one, one)
    with pytest.raises(InputError):
        SieveParams(1, 1, one, one)
    with pytest.raises(InputError):
        SieveParams(1, 2, one, one, k0=1)
    with pytest.raises(InputError):
        SieveParams(1, 2, one, one, lam=0)
    assert SieveParams(2, 3, one, one).lam == 4


def test_params_for_system(ctx, sophie_germain):
    params = SieveParams.for_system(sophie_germain, Regime.UNCONDITIONAL, ctx)
    assert (params.kappa, params.a1) == (2, 3)
    assert float(params.a2) == pytest.approx(18.2389, abs=1e-3)
    assert params.a2 is params.l


def test_m0_against_straight_line_formula(ctx, toy):
    l, kappa, a1, a2 = 10.0, 1, 2, 1.0
    u = a2 / l
    q = a1 * a2 / l
    y = math.exp(-l)
    series = 1 / 2 + q / (3 * (1 - q))
    expected = (max(u + q * (kappa + u), a2 / l) + 1.5 * kappa / l ** 2 + kappa * y / (1 - y)
                + a1 * a1 * a2 / l * (kappa + u) * series)
    assert float(m0(ctx.real(10), toy)) == pytest.approx(expected, rel=1e-12)


def test_m0_needs_log_w_above_a1a2(ctx, toy):
    with pytest.raises(DomainError):
        m0(ctx.real(2), toy)


def test_m0_at_the_convergence_threshold(ctx):
    a2 = ctx.real(3).log()
    params = SieveParams(1, 2, a2, a2, k0=2)
    log_w = params.a1a2
    assert log_w.compare(params.a1a2) is Ordering.EQUAL
    with pytest.raises(DomainError, match="below convergence threshold"):
        m0(log_w, params)


def test_m0_decreases_with_k0(ctx, toy):
    values = m0_by_k0(ctx.real(10), toy)
    assert sorted(values) == [2, 10, 50]
    assert values[50] <= values[2]


def test_m1(ctx, toy):
    ell = math.log(100) / 2
    expected = math.log(2) + 1 / ell + 2 / ell * (1 + 1 / ell)
    assert float(m1(100, 1, toy)) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        m1(1, 1, toy)


def test_m4(toy):
    assert float(m4(toy)) == pytest.approx(10.05, abs=5e-3)


def test_m9_and_log_z0(ctx):
    log_x = ctx.real(10 ** 6)
    loglog = math.log(10 ** 6)
    assert float(m9(log_x, 1)) == pytest.approx(5 / (1 - 5 * loglog / 10 ** 6))
    assert float(log_z0(log_x, 1)) == pytest.approx((10 ** 6 - 5 * loglog) / 2)
    with pytest.raises(DomainError):
        m9(ctx.real(10), 1)


def test_combined_coefficient_at_kappa_one(ctx):
    m8, m9_value, log_x = ctx.real(7), ctx.real(5), ctx.real(1000)
    loglog = math.log(1000)
    expected = 5 + 7 / loglog + 35 / 1000
    assert float(combined_coefficient(m8, m9_value, log_x, 1)) == pytest.approx(expected, rel=1e-12)


def test_combined_coefficient_at_kappa_two(ctx):
    m8, m9_value, log_x = ctx.real(7), ctx.real(5), ctx.real(1000)
    t = math.log(1000) / 1000
    b = (1 + 5 * t) ** 2 - 1
    expected = 7 / math.log(1000) * (1 + b) + b / t
    assert float(combined_coefficient(m8, m9_value, log_x, 2)) == pytest.approx(expected, rel=1e-12)


def test_log_mfrak(ctx):
    log_x = ctx.real(100)
    assert float(log_mfrak([parse_poly('k^2 + 3')], log_x)) == pytest.approx(50)
    assert float(log_mfrak([parse_poly('2k + 1')], log_x)) == pytest.approx(math.log((math.exp(50) - 1) / 2))
    assert float(log_mfrak([parse_poly('k^3 + 1000')], ctx.real(2))) == pytest.approx(math.log(1000))


def test_toy_w_and_g_bounds(ctx, toy):
    # F(n) = n sifted by the primes below sqrt(30): W = 4/15 and G = 11/4
    log_z = ctx.log_of(30) / 2
    w = Fraction(4, 15)
    assert w <= w_upper_bound(log_z, toy).fraction_bounds()[0]
    assert 1 / w <= w_reciprocal_bound(log_z, toy).fraction_bounds()[0]
    assert Fraction(4, 11) <= g_reciprocal_bound(w, log_z, toy).fraction_bounds()[0]


def test_conditions_f0_grh(ctx, f0):
    params = SieveParams.for_system(f0, Regime.GRH, ctx)
    passing = check_conditions(ctx.real(Fraction('5.5e7')), params)
    assert passing.passed
    assert passing.most_violated() is None
    failing = check_conditions(ctx.real(10 ** 6), params)
    assert not failing.passed
    assert failing.most_violated() is not None
    assert len(failing.clauses) == 4


def test_tower_at_threshold(ctx, f0):
    params = SieveParams.for_system(f0, Regime.GRH, ctx)
    constants = sieve_tower(ctx.real(Fraction('5.5e7')), params)
    assert constants.r < 1
    assert constants.m6 is not None
    # 4 log m2 dominates log tau under GRH
    assert float(4 * constants.m2.log()) == pytest.approx(1.27e5, rel=0.02)


def test_grid_point():
    point = GridPoint(Fraction(55, 10), 7)
    assert point.log_x == 55 * 10 ** 6
    assert str(point) == '5.5e7'


def test_threshold_report_below_threshold(ctx, f0):
    with pytest.raises(ConditionFailure):
        threshold_report(f0, 10 ** 6, Regime.GRH, ctx)


def test_tau_at_given_threshold(ctx, f0):
    report = threshold_report(f0, '5.5e7', Regime.GRH, ctx)
    report = assemble_bound(report, f0)
    assert report.tau.c1.log() < 0
    assert float(report.log_tau) == pytest.approx(1.28266e5, rel=0.05)
    assert 'pi_F(x) <' in report.statement
    assert report.to_json()['conditional_on_grh'] is True


def test_find_minimal_x_f0_grh(ctx, f0):
    report = find_minimal_x_for_system(f0, Regime.GRH, ctx, b1_max=9, workers=2)
    assert report.conditions.passed
    assert abs(report.log_x / Fraction('5.5e7') - 1) <= Fraction(1, 10)
    assert all(ok for _, ok in report.ladder)
    assert 'conditional on GRH' in report.notes


def test_find_minimal_x_reports_failure(ctx, f0):
    with pytest.raises(ConditionFailure):
        find_minimal_x_for_system(f0, Regime.UNCONDITIONAL, ctx, b1_max=3, workers=1)


def test_sophie_germain_threshold(ctx, sophie_germain):
    report = find_minimal_x_for_system(sophie_germain, Regime.UNCONDITIONAL, ctx, b1_max=8, workers=2)
    assert report.log_x == Fraction(13, 10) * 10 ** 6
    assert report.minimality_certified


@pytest.mark.slow
@pytest.mark.parametrize("index, log_x", [(1, '5.7e8'), (2, '6.5e9'), (3, '9.3e10')])
def test_find_minimal_x_other_cases_grh(ctx, cases, index, log_x):
    report = find_minimal_x_for_system(cases[index], Regime.GRH, ctx, b1_max=12)
    assert abs(report.log_x / Fraction(log_x) - 1) <= Fraction(1, 10)
