from fractions import Fraction

import pytest
from sympy import isprime

from services.constants_service import PolySystem, Regime
from services.sieve_service import SieveParams
from services.verify_service import (
    EnvelopeSample,
    SiftInstance,
    bateman_horn_prediction,
    count_pi_F,
    count_window,
    exact_densities,
    lemma_envelope_checks,
    random_instances,
    remainder_records,
    rho_identity_checks,
    selberg_inequality_check,
    sift_exact,
    sophie_germain_count,
)
from utils.errors import DomainError, InputError, OracleError
from utils.polyalg import parse_poly

IDENTITY = parse_poly('k')


@pytest.fixture
def toy_instance():
    return SiftInstance(IDENTITY, 30, 30, Fraction(30))


def test_sifting_primes(toy_instance):
    assert toy_instance.sifting_primes == [2, 3, 5]
    assert SiftInstance(IDENTITY, 30, 30, Fraction(25)).sifting_primes == [2, 3]


def test_sift_exact_toy(toy_instance):
    assert sift_exact(toy_instance) == 8


def test_sift_exact_matches_enumeration():
    F = parse_poly('k^2 + 3')
    instance = SiftInstance(F, 10 ** 4, 10 ** 4, Fraction(50 ** 2))
    primes = [p for p in range(2, 50) if isprime(p)]
    expected = sum(1 for n in range(1, 10 ** 4 + 1) if all((n * n + 3) % p for p in primes))
    assert sift_exact(instance) == expected


def test_sift_limits():
    with pytest.raises(OracleError):
        sift_exact(SiftInstance(IDENTITY, 10 ** 8, 10 ** 8, Fraction(4)))
    with pytest.raises(InputError):
        SiftInstance(IDENTITY, 10, 0, Fraction(4))


def test_exact_densities_toy(toy_instance):
    densities = exact_densities(toy_instance)
    assert densities.w == Fraction(4, 15)
    assert densities.g == Fraction(11, 4)
    assert densities.omega == {2: 1, 3: 1, 5: 1}


def test_exact_densities_reject_full_residue_class():
    with pytest.raises(DomainError):
        exact_densities(SiftInstance(parse_poly('k^2 + k'), 30, 30, Fraction(30)))


def test_selberg_toy(toy_instance):
    check = selberg_inequality_check(toy_instance)
    assert check.sifted == 8
    assert check.main == Fraction(120, 11)
    assert check.passed
    assert check.to_json()['passed'] is True


def test_random_instances_are_reproducible():
    first = random_instances(5, seed=3, max_y=10 ** 3, max_z=20)
    second = random_instances(5, seed=3, max_y=10 ** 3, max_z=20)
    assert first == second
    assert all(inst.z_squared <= 400 for inst in first)


def test_selberg_random_instances():
    for instance in random_instances(25, seed=1, max_y=10 ** 4, max_z=40):
        assert selberg_inequality_check(instance).passed


@pytest.mark.slow
def test_selberg_random_sweep():
    for instance in random_instances(200, seed=0):
        assert selberg_inequality_check(instance).passed


def test_remainder_records_toy(toy_instance):
    records = remainder_records(toy_instance)
    assert [r.d for r in records] == [1, 2, 3, 5, 6, 10, 15]
    by_d = {r.d: r for r in records}
    assert by_d[1].count == 30
    assert by_d[6].count == 5
    assert all(r.within for r in records)


def test_remainder_records_given_moduli():
    instance = SiftInstance(parse_poly('k^2 + 3'), 1000, 1000, Fraction(50 ** 2))
    records = remainder_records(instance, moduli=[7, 21, 91])
    assert [r.rho for r in records] == [2, 2, 4]
    assert all(r.within for r in records)
    with pytest.raises(InputError):
        remainder_records(instance, moduli=[12])


def test_count_pi_f0():
    system = PolySystem.parse(['k^2 + 3'])
    result = count_pi_F(system, 10, cross_check=True)
    assert result.count == 4
    assert result.methods == ('sieve', 'isprime')


def test_count_methods_agree_on_a_window():
    system = PolySystem.parse(['k^3 - 5'])
    result = count_window(system, 2000, 1000, cross_check=True, workers=2)
    assert result.count > 0


def test_count_prime_arguments():
    system = PolySystem.parse(['2k + 1'])
    result = count_window(system, 10 ** 4, 10 ** 4, prime_n=True, cross_check=True)
    assert result.count == sophie_germain_count(10 ** 4)
    assert result.what.startswith('prime n')


def test_count_limits():
    system = PolySystem.parse(['k^2 + 3'])
    with pytest.raises(OracleError):
        count_window(system, 10 ** 10, 10)
    with pytest.raises(InputError):
        count_window(system, 100, 10, method='guess')


def test_sophie_germain_counts():
    assert sophie_germain_count(10) == 3
    assert sophie_germain_count(1) == 0
    assert sophie_germain_count(10 ** 6) == sophie_germain_count(10 ** 6, 'simple')
    with pytest.raises(InputError):
        sophie_germain_count(100, 'guess')


def test_bateman_horn_prediction_is_close():
    system = PolySystem.parse(['2k + 1']).shifted()
    count = sophie_germain_count(10 ** 5)
    predicted = bateman_horn_prediction(system, 10 ** 5)
    assert predicted == pytest.approx(count, rel=0.2)
    assert bateman_horn_prediction(system, 2) == 0.0


def test_envelope_checks_f0(ctx, f0):
    params = SieveParams.for_system(f0, Regime.UNCONDITIONAL, ctx)
    samples = [EnvelopeSample(100, 10 ** 5, Fraction(0), 2), EnvelopeSample(100, 10 ** 5, Fraction(1), 3)]
    report = lemma_envelope_checks(f0, params, samples)
    checks = {r.check for r in report.records}
    assert {'eq5_lower', 'eq5_upper', 'exp1', 'exp2', 'exp3', 'smallx', 'lf', 'rosser'} <= checks
    assert report.passed, report.failures
    assert len([r for r in report.records if r.check == 'exp1']) == 2


def test_envelope_checks_grh_shifted(ctx, sophie_germain):
    params = SieveParams.for_system(sophie_germain, Regime.GRH, ctx)
    report = lemma_envelope_checks(sophie_germain, params, [EnvelopeSample(2, 10 ** 4)])
    assert report.passed, report.failures
    with pytest.raises(InputError):
        lemma_envelope_checks(sophie_germain, params, [EnvelopeSample(10, 5)])


def test_rho_identities():
    report = rho_identity_checks(legendre_limit=10 ** 4, multiplicative_limit=300, split_systems=5,
                                 split_limit=10 ** 4)
    assert report.passed
    assert report.checked['legendre'] > 1000
    assert report.checked['split'] > 0
