import numpy as np
import pytest

from utils.errors import InputError
from utils.modarith import (
    PrimeStream,
    legendre,
    primes_between,
    primes_up_to,
    rho,
    rho_array,
    rho_product_array,
    rho_split,
    rho_squarefree,
    rho_table,
    roots_mod_p,
    segment_mask,
    simple_sieve,
)
from utils.polyalg import discriminant, parse_poly, product

F0 = parse_poly("k^2 + 3")
F1 = parse_poly("k^3 - 5")


def test_simple_sieve():
    assert simple_sieve(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert simple_sieve(1).tolist() == []
    assert not simple_sieve(30).flags.writeable


def test_primes_between_is_half_open():
    assert primes_between(11, 29).tolist() == [11, 13, 17, 19, 23]
    assert primes_between(10, 10).tolist() == []


def test_segment_mask():
    mask = segment_mask(90, 110, simple_sieve(11))
    assert (90 + np.flatnonzero(mask)).tolist() == [97, 101, 103, 107, 109]
    assert np.flatnonzero(segment_mask(0, 10, simple_sieve(4))).tolist() == [2, 3, 5, 7]


def test_prime_stream_matches_simple_sieve():
    assert list(PrimeStream(1000, segment_size=37)) == simple_sieve(1000).tolist()
    assert list(PrimeStream(100, segment_size=10, start=50)) == primes_between(50, 101).tolist()


def test_primes_up_to_segmented_branch_agrees():
    tail = np.concatenate(list(PrimeStream(10 ** 5, segment_size=4096).segments()))
    assert np.array_equal(tail, primes_up_to(10 ** 5))


@pytest.mark.parametrize("p, expected", [(2, 1), (3, 1), (5, 0), (7, 2), (13, 2), (11, 0)])
def test_rho_k2_plus_3(p, expected):
    assert rho(F0, p) == expected
    assert rho(F0, p, crossover=2) == expected


def test_rho_linear_and_degenerate():
    assert rho(parse_poly("2k + 1"), 2) == 0
    assert rho(parse_poly("2k + 1"), 7) == 1
    assert rho(parse_poly("2k + 2"), 2) == 2


def test_finite_field_path_matches_brute_force():
    for p in primes_up_to(300).tolist():
        assert rho(F1, p, crossover=2) == rho(F1, p)
        assert roots_mod_p(F1, p, crossover=2) == roots_mod_p(F1, p)


def test_roots():
    assert roots_mod_p(F0, 7) == [2, 5]
    assert roots_mod_p(F0, 7, crossover=2) == [2, 5]
    assert roots_mod_p(F0, 5) == []


def test_rho_squarefree():
    assert rho_squarefree(F0, 21) == 2
    assert rho_squarefree(F0, 6) == 1
    assert rho_squarefree(F0, 1) == 1
    with pytest.raises(InputError):
        rho_squarefree(F0, 12)


def test_legendre():
    assert legendre(-3, 7) == 1
    assert legendre(-3, 5) == -1
    with pytest.raises(InputError):
        legendre(3, 2)


def test_rho_array_matches_scalar():
    primes = primes_up_to(2000)
    for text in ("k^2 + 3", "2k + 1", "3k^2 + 5k + 7", "k^3 - 5", "6k + 9"):
        F = parse_poly(text)
        assert rho_array(F, primes).tolist() == [rho(F, p) for p in primes.tolist()]


def test_rho_split_for_sophie_germain_factors():
    factors = [parse_poly("k"), parse_poly("2k + 1")]
    assert rho_split(factors, 5) == (2, True)
    assert rho_split(factors, 2).total == rho(product(factors), 2) == 1


def test_rho_product_array_uses_product_below_discriminant():
    factors = [parse_poly("k^2 + 3"), parse_poly("k + 1")]
    abs_disc = discriminant(product(factors)).abs_disc
    primes = primes_up_to(500)
    expected = [rho(product(factors), p) for p in primes.tolist()]
    assert rho_product_array(factors, primes, abs_disc).tolist() == expected


def test_rho_table():
    table = rho_table(F0, 20)
    assert len(table) == 8
    assert table[7] == 2
    assert dict(table.rows())[19] == 2
    with pytest.raises(KeyError):
        table[9]
