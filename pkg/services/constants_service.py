"""
Polynomial constants service for explicit-sieve.

Builds validated polynomial systems and evaluates the constants attached
to them: the Nagell-type constant Q_F in both regimes and the admissible
sieve constant L_F.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from config.settings import PRIME_BUDGET
from utils.errors import DomainError, PolynomialError
from utils.mertens import float_sum, mertens_bar, mertens_sqrt
from utils.modarith import primes_between, rho, rho_product_array, rho_split
from utils.polyalg import (
    Certificate,
    DiscriminantData,
    IntPolynomial,
    IrreducibilityResult,
    discriminant,
    fixed_divisor_check,
    irreducibility_certificate,
    parse_poly,
    product,
)
from utils.rignum import NumericContext, Ordering, XReal, xmax

logger = logging.getLogger(__name__)


class Regime(str, enum.Enum):
    UNCONDITIONAL = 'unconditional'
    GRH = 'grh'


class QfVariant(str, enum.Enum):
    PRINTED = 'printed'
    # Lambda_F(d) sqrt(D_F) without the C_F(d) factor
    WITHOUT_CF = 'without_cf'


@dataclass(frozen=True, eq=False)
class PolySystem:
    """Distinct irreducible polynomials F_1..F_g sieved simultaneously."""

    factors: Tuple[IntPolynomial, ...]
    certificates: Tuple[IrreducibilityResult, ...]
    base: Optional[PolySystem] = None

    @classmethod
    def from_polys(cls, polys: Sequence[IntPolynomial], prime_budget: int = PRIME_BUDGET,
                   base: Optional[PolySystem] = None) -> PolySystem:
        """Validate and build a system; raises PolynomialError when the sieve cannot use it."""
        polys = tuple(polys)
        if not polys:
            raise PolynomialError("a system needs at least one polynomial")
        if len(set(polys)) != len(polys):
            raise PolynomialError("polynomials in a system must be distinct")
        certificates = []
        for F in polys:
            if F.degree < 1:
                raise PolynomialError(f"{F} is constant")
            if F.leading <= 0:
                raise PolynomialError(f"{F} must have a positive leading coefficient")
            certificate = irreducibility_certificate(F, prime_budget)
            if certificate.status is Certificate.REDUCIBLE:
                raise PolynomialError(f"{F} is reducible ({certificate.reason})")
            certificates.append(certificate)
        prod = product(polys)
        discriminant(prod)
        offending = fixed_divisor_check(prod)
        if offending is not None:
            raise PolynomialError(f"{prod} has the fixed prime divisor {offending}")
        return cls(polys, tuple(certificates), base)

    @classmethod
    def parse(cls, texts: Sequence[str], prime_budget: int = PRIME_BUDGET) -> PolySystem:
        return cls.from_polys([parse_poly(text) for text in texts], prime_budget)

    @property
    def g(self) -> int:
        return len(self.factors)

    @cached_property
    def product(self) -> IntPolynomial:
        return product(self.factors)

    @property
    def degree(self) -> int:
        return self.product.degree

    @property
    def kappa(self) -> int:
        return self.g

    @property
    def a1(self) -> int:
        return self.degree + 1

    @cached_property
    def disc(self) -> DiscriminantData:
        return discriminant(self.product)

    @property
    def irreducibility_proven(self) -> bool:
        return all(c.status is Certificate.PROVEN for c in self.certificates)

    @property
    def is_shifted(self) -> bool:
        return self.base is not None

    @property
    def label(self) -> str:
        return ' * '.join(f"({F})" if len(self.factors) > 1 else str(F) for F in self.factors)

    def rho(self, p: int) -> int:
        return rho(self.product, p)

    def rho_split(self, p: int):
        return rho_split(self.factors, p, self.disc.abs_disc)

    def rho_array(self, primes: np.ndarray) -> np.ndarray:
        return rho_product_array(self.factors, primes, self.disc.abs_disc)

    def shifted(self) -> PolySystem:
        """The system k*F_1*...*F_g used to count prime n with every F_i(n) prime."""
        identity = IntPolynomial((0, 1), self.factors[0].variable)
        if identity in self.factors:
            raise PolynomialError("a shifted system needs F_i(k) != k")
        for p in (int(q) for q in range(2, self.degree + 2)):
            if any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
                continue
            if self.product(0) % p != 0 and self.rho(p) >= p - 1:
                raise PolynomialError(f"shifted system needs rho_F({p}) < {p - 1}")
        return PolySystem.from_polys((identity,) + self.factors, base=self)

    def describe(self) -> Dict[str, Any]:
        return {
            'factors': [str(F) for F in self.factors],
            'product': str(self.product),
            'g': self.g,
            'degree': self.degree,
            'kappa': self.kappa,
            'A1': self.a1,
            'disc': str(self.disc.disc),
            'weighted_disc': str(self.disc.weighted_disc),
            'irreducibility': [c.status.value for c in self.certificates],
            'shifted_from': [str(F) for F in self.base.factors] if self.base else None,
        }


@dataclass(frozen=True)
class QfConstants:
    d: int
    weighted_disc: int
    variant: QfVariant
    mfrak: XReal
    lambda_k: Optional[XReal]
    big_lambda: XReal
    c_f: Optional[XReal]
    mertens_c: XReal
    mertens_sqrt_disc: XReal
    lambda_term: XReal
    q_unconditional: XReal
    q_grh: XReal

    def q(self, regime: Regime) -> XReal:
        return self.q_grh if Regime(regime) is Regime.GRH else self.q_unconditional

    @property
    def lambda_share(self) -> float:
        """Share of the unconditional Q_F carried by the Lambda_F subterm."""
        if not self.lambda_term.sign:
            return 0.0
        ratio = self.lambda_term / self.q_unconditional
        return float(ratio)

    def to_json(self) -> Dict[str, Any]:
        optional = lambda x: x.to_json() if x is not None else None  # noqa: E731
        return {
            'd': self.d,
            'weighted_disc': str(self.weighted_disc),
            'variant': self.variant.value,
            'mfrak': self.mfrak.to_json(),
            'lambda_K': optional(self.lambda_k),
            'Lambda_F': self.big_lambda.to_json(),
            'C_F': optional(self.c_f),
            'mertens_c': self.mertens_c.to_json(),
            'mertens_sqrt_D': self.mertens_sqrt_disc.to_json(),
            'lambda_term': self.lambda_term.to_json(),
            'Q_unconditional': self.q_unconditional.to_json(),
            'Q_grh': self.q_grh.to_json(),
        }


def mfrak(d: int, ctx: NumericContext) -> XReal:
    """(pi/4)^d d^(2d) / (d!)^2."""
    return (ctx.pi() / 4) ** d * ctx.real(Fraction(d ** (2 * d), math.factorial(d) ** 2))


def lambda_k(d: int, ctx: NumericContext) -> XReal:
    if d < 2:
        raise DomainError("lambda_K is defined for d >= 2")
    pi_half = ctx.pi() / 2
    if d <= 13:
        root = ctx.real(d + 1) ** Fraction(d - 1, 2 * d)
        middle = (pi_half + (Fraction(5, 8) - Fraction(1, d) + Fraction(3, 8 * d * d))).sqrt()
        exponent = d * (Fraction('2.27') + Fraction(4 * d, d - 1) + Fraction(1, 100 * d * d)
                        + Fraction(1, 500 * d ** 6))
    else:
        root = ctx.real(d + 1) ** Fraction(2 * d * d - d - 1, 2 * d)
        middle = (pi_half + (Fraction(5, 8) + Fraction(1, d) + Fraction(3, 8 * d * d))).sqrt()
        exponent = Fraction('4.13') * d + Fraction(2, 100 * d)
    return root * middle * ctx.real(exponent).exp()


def big_lambda(d: int, weighted_disc: int, ctx: NumericContext) -> XReal:
    """Lambda_F(d); zero for linear polynomials."""
    if d == 1:
        return ctx.zero()
    if weighted_disc <= 1:
        raise DomainError("Lambda_F needs a weighted discriminant above 1 for d >= 2")
    log_m = mfrak(d, ctx).log()
    if log_m.sign <= 0:
        raise DomainError(f"log m({d}) is not positive")
    log_disc = ctx.log_of(weighted_disc)
    head = Fraction('0.54') * (3 * d - 1) * lambda_k(d, ctx) / ((d - 1) ** 2 * log_m ** (d - 1))
    tail = (ctx.real(d) ** Fraction(3, 2) * math.factorial(d)
            * ctx.real(weighted_disc) ** Fraction(1, d + 1) * log_disc ** (d - 1))
    return head * tail


def c_f(d: int, ctx: NumericContext) -> XReal:
    if d < 2:
        raise DomainError("C_F is defined for d >= 2")
    value = (Fraction('1.38') * (d + 1) ** 2 / (d - 1) + Fraction('1.52') * d * (d + 1)
             + Fraction('111.26') * d)
    return ctx.real(value)


@lru_cache(maxsize=256)
def qf(F: IntPolynomial, ctx: NumericContext, variant: QfVariant = QfVariant.PRINTED) -> QfConstants:
    """
    Nagell-type constants of an irreducible polynomial.

    Args:
        F: Irreducible polynomial
        ctx: Numeric context
        variant: PRINTED evaluates Lambda_F C_F sqrt(D_F); WITHOUT_CF drops C_F

    Returns:
        QfConstants with both regimes materialised
    """
    variant = QfVariant(variant)
    d = F.degree
    D = discriminant(F).weighted_disc
    m_c = mertens_bar(abs(F.leading), ctx).value
    m_d = mertens_sqrt(D, ctx).value
    if d == 1:
        lam_k, lam, cf = None, ctx.zero(), None
        lambda_term = ctx.zero()
    else:
        lam_k, lam, cf = lambda_k(d, ctx), big_lambda(d, D, ctx), c_f(d, ctx)
        lambda_term = lam * ctx.real(D).sqrt()
        if variant is QfVariant.PRINTED:
            lambda_term = lambda_term * cf
    q_unc = d * (m_c + m_d + Fraction('2.52')) + 1 + lambda_term
    q_grh = d * (m_c + m_d + Fraction('10.79')) + ctx.ln2() + Fraction('4.73') * ctx.log_of(D)
    if q_grh.compare(q_unc) is Ordering.GREATER:
        # always the case for linear F, where the Lambda term vanishes
        log = logger.warning if d >= 2 else logger.debug
        log("Q_grh exceeds Q_unconditional for %s", F)
    return QfConstants(d, D, variant, mfrak(d, ctx), lam_k, lam, cf, m_c, m_d, lambda_term, q_unc, q_grh)


def lf(system: PolySystem, regime: Regime, ctx: NumericContext,
       variant: QfVariant = QfVariant.PRINTED) -> XReal:
    """Admissible L_F = A_2 for the system."""
    regime = Regime(regime)
    if regime is Regime.GRH:
        logger.info("L_F for %s is conditional on GRH", system.label)
    q_max = None
    for F in system.factors:
        q = qf(F, ctx, variant).q(regime)
        q_max = q if q_max is None else xmax(q_max, q)
    log_m = system.disc.log_m_f(ctx)
    g, d = system.g, system.degree
    if g >= 2:
        return 2 * (max(g, d - 1) * log_m + g * q_max)
    return 2 * xmax(max(1, d - 1) * log_m, q_max)


def lf_empirical_check(system: PolySystem, w, z) -> float:
    """
    Upper bound on |sum_{w<=p<z} rho_F(p) log p / p - g log(z/w)|.

    A necessary consequence of L_F being admissible, far from tight.
    """
    w, z = Fraction(w), Fraction(z)
    if not 2 <= w < z:
        raise DomainError("lf_empirical_check needs 2 <= w < z")
    primes = primes_between(math.ceil(w), math.ceil(z))
    values = primes.astype(np.float64)
    terms = system.rho_array(primes).astype(np.float64) * np.log(values) / values
    lo, hi = float_sum(terms)
    expected = system.g * (math.log(z.numerator) - math.log(z.denominator)
                           - math.log(w.numerator) + math.log(w.denominator))
    slack = 4 * 2.0 ** -52 * (abs(expected) + 1)
    return max(abs(float(lo) - expected), abs(float(hi) - expected)) + slack
