import pytest

from utils.errors import InputError, PolynomialError, PolynomialSyntaxError
from utils.polyalg import (
    Certificate,
    IntPolynomial,
    discriminant,
    fixed_divisor_check,
    irreducibility_certificate,
    parse_poly,
    product,
)


@pytest.mark.parametrize("text, coeffs", [
    ("k^2 + 3", (3, 0, 1)),
    ("k^3 - 5", (-5, 0, 0, 1)),
    ("2*k^6 + 3", (3, 0, 0, 0, 0, 0, 2)),
    ("2k + 1", (1, 2)),
    ("-k + 7", (7, -1)),
    ("k^2 + k^2 + 1", (1, 0, 2)),
])
def test_parse(text, coeffs):
    assert parse_poly(text).coeffs == coeffs


def test_str_round_trips_case_polynomials():
    for text in ("k^2 + 3", "k^3 - 5", "k^5 + 3", "2*k^6 + 3"):
        assert str(parse_poly(text)) == text


@pytest.mark.parametrize("text, position", [
    ("k^ + 1", 3),
    ("k + y", 4),
    ("k + ", 4),
    ("k $ 2", 2),
    ("", 0),
])
def test_syntax_errors_report_position(text, position):
    with pytest.raises(PolynomialSyntaxError) as info:
        parse_poly(text)
    assert info.value.position == position


def test_zero_polynomial_rejected():
    with pytest.raises(InputError):
        IntPolynomial((0, 0))


def test_evaluation_and_product():
    F = parse_poly("2k + 1")
    assert F(5) == 11
    assert product([IntPolynomial((0, 1)), F]).coeffs == (0, 1, 2)


@pytest.mark.parametrize("text, disc, weighted", [
    ("k^2 + 3", -12, 12),
    ("k^3 - 5", -675, 675),
    ("2*k^6 + 3", -362797056, 380420285792256),
    ("2k + 1", 1, 1),
])
def test_discriminants(text, disc, weighted):
    data = discriminant(parse_poly(text))
    assert data.disc == disc
    assert data.abs_disc == abs(disc)
    assert data.weighted_disc == weighted


def test_repeated_root_has_no_discriminant():
    with pytest.raises(PolynomialError):
        discriminant(parse_poly("k^2 + 2k + 1"))


@pytest.mark.parametrize("text, status", [
    ("k^2 + 3", Certificate.PROVEN),
    ("2*k^6 + 3", Certificate.PROVEN),
    ("k^2 - 1", Certificate.REDUCIBLE),
    ("2k + 4", Certificate.REDUCIBLE),
    ("k^4 + 1", Certificate.UNPROVEN),
])
def test_irreducibility(text, status):
    assert irreducibility_certificate(parse_poly(text)).status is status


def test_fixed_divisors():
    assert fixed_divisor_check(parse_poly("k^2 + k")) == 2
    assert fixed_divisor_check(parse_poly("k^3 - k + 3")) == 3
    assert fixed_divisor_check(parse_poly("k^2 + 3")) is None
    assert fixed_divisor_check(parse_poly("2k^2 + k")) is None
