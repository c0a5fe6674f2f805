from decimal import Decimal
from fractions import Fraction

import pytest

from config.settings import RunConfig
from services.constants_service import PolySystem, QfVariant, Regime
from services.report_service import (
    CASES,
    PUBLISHED,
    Table1Result,
    Table1Row,
    envelope,
    lambda_share,
    load_report,
    render,
    reproduce_sophie_germain,
    reproduce_table1,
)
from utils.errors import InputError


@pytest.fixture
def row(ctx):
    return Table1Row(0, Regime.GRH, QfVariant.PRINTED, Fraction('5.6e7'),
                     ctx.real(Fraction('1.28266e5')), None)


def test_published_cases_cover_both_regimes():
    assert set(CASES) == {0, 1, 2, 3}
    for regime in (Regime.GRH, Regime.UNCONDITIONAL):
        assert set(PUBLISHED[regime]) == set(CASES)


def test_row_ratios(row):
    assert row.published == (Decimal('5.5e7'), Decimal('1.28266e5'))
    assert row.ratio_log_x == Decimal('1.0182')
    assert row.ratio_log_tau == Decimal('1.0000')
    assert row.within_tolerance


def test_row_outside_tolerance(ctx):
    far = Table1Row(0, Regime.GRH, QfVariant.PRINTED, Fraction('5.5e7'),
                    ctx.real(Fraction('2e5')), 0.25)
    assert not far.within_tolerance


def test_failed_row(ctx):
    failed = Table1Row(1, Regime.UNCONDITIONAL, QfVariant.WITHOUT_CF, Fraction(0), None, 0.5,
                       'utils.errors.ConditionFailure: no grid point')
    assert failed.ratio_log_x is None
    assert failed.ratio_log_tau is None
    assert not failed.within_tolerance
    data = failed.to_row()
    assert data['log_X'] == ''
    assert data['variant'] == 'without_cf'
    assert data['within_tolerance'] == 'false'


def test_to_row_keys(row):
    data = row.to_row()
    assert list(data) == ['i', 'regime', 'variant', 'log_X', 'log_tau', 'published_log_X', 'published_log_tau',
                          'ratio_log_X', 'ratio_log_tau', 'within_tolerance', 'lambda_share', 'error']
    assert data['within_tolerance'] == 'true'
    assert data['lambda_share'] == ''


def test_lambda_share_per_regime(ctx, f0):
    assert lambda_share(f0, Regime.GRH, ctx) is None
    share = lambda_share(f0, Regime.UNCONDITIONAL, ctx)
    assert 0 < share < 1
    assert lambda_share(PolySystem.parse(['2k + 1']), Regime.UNCONDITIONAL, ctx) == 0.0
    row = Table1Row(0, Regime.UNCONDITIONAL, QfVariant.PRINTED, Fraction('1e30'), ctx.real(10), share)
    assert row.to_row()['lambda_share'] == f'{share:.6f}'


def test_only_grh_rows_gate_the_result(row, ctx):
    unconditional = Table1Row(0, Regime.UNCONDITIONAL, QfVariant.PRINTED, Fraction('1e30'),
                              ctx.real(10), 0.9)
    assert Table1Result(rows=[row, unconditional]).passed
    assert not Table1Result(rows=[unconditional]).passed
    assert not Table1Result().passed


def test_envelope_keys():
    payload = envelope('analyze', RunConfig(regime='grh'), {'passed': True})
    assert payload['command'] == 'analyze'
    assert payload['conditional_on_grh'] is True
    assert payload['precision_digits'] == RunConfig().digits
    assert 'm0' in payload['provenance']
    assert payload['result'] == {'passed': True}


def test_render_formats(row):
    payload = envelope('table1', RunConfig(), {'passed': True})
    rows = [row.to_row()]
    assert load_report(render(payload, 'json'))['command'] == 'table1'
    csv_text = render(payload, 'csv', rows)
    assert csv_text.splitlines()[0].startswith('i,regime,variant')
    assert len(csv_text.splitlines()) == 2
    text = render(payload, 'text', rows)
    assert text.startswith('explicit-sieve ')
    assert 'table1' in text.splitlines()[0]


def test_render_rejects_csv_without_rows():
    payload = envelope('analyze', RunConfig(), {})
    with pytest.raises(InputError):
        render(payload, 'csv')
    with pytest.raises(InputError):
        render(payload, 'yaml')


def test_text_flattens_results():
    payload = envelope('sg-count', RunConfig(), {'n': 10, 'count': 3})
    text = render(payload, 'text')
    assert 'n: 10' in text
    assert 'count: 3' in text


def test_table1_rejects_unknown_case(ctx):
    with pytest.raises(InputError):
        reproduce_table1(RunConfig(), ctx, cases=(7,), regimes=(Regime.GRH,))


@pytest.mark.slow
def test_table1_grh_case_zero(ctx):
    result = reproduce_table1(RunConfig(regime='grh'), ctx, cases=(0,), regimes=(Regime.GRH,))
    assert result.passed
    assert len(result.reports) == 1


@pytest.mark.slow
def test_sophie_germain_reproduction(ctx):
    result = reproduce_sophie_germain(RunConfig(), ctx)
    assert result.coefficient == 16
    assert result.passed, result.checks
    assert result.to_json()['coefficient_over_twin_constant'] == 16
