"""
Exact integer polynomials: parsing, discriminants, irreducibility
certificates and fixed prime divisors.

Example:
    F = parse_poly("2*k^6 + 3")
    discriminant(F).weighted_disc      # 380420285792256
"""
from __future__ import annotations

import enum
import logging
import math
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol, divisors, primefactors, primerange
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_from_int_poly, gf_irreducible_p, gf_monic

from utils.errors import InputError, PolynomialError, PolynomialSyntaxError

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>[A-Za-z])|(?P<op>[-+*^]))")


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; ``coeffs[j]`` is the coefficient of x**j."""

    coeffs: Tuple[int, ...]
    variable: str = 'k'

    def __post_init__(self):
        coeffs = [int(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            raise InputError("zero polynomial")
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int], variable: str = 'k') -> IntPolynomial:
        return cls(tuple(coeffs), variable)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    @property
    def content(self) -> int:
        return math.gcd(*self.coeffs) if len(self.coeffs) > 1 else abs(self.coeffs[0])

    def __call__(self, n: int) -> int:
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * n + a
        return acc

    def __mul__(self, other: IntPolynomial) -> IntPolynomial:
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(tuple(out), self.variable)

    def dense(self) -> List[int]:
        """Coefficients highest degree first, as galoistools expects."""
        return list(reversed(self.coeffs))

    def mod(self, p: int) -> List[int]:
        """Reduction modulo p in dense form (empty list for the zero polynomial)."""
        return gf_from_int_poly(self.dense(), p)

    def to_sympy(self) -> Poly:
        return Poly(self.dense(), Symbol(self.variable), domain=ZZ)

    def __str__(self) -> str:
        terms = []
        for j in range(self.degree, -1, -1):
            a = self.coeffs[j]
            if a == 0:
                continue
            sign = '-' if a < 0 else '+'
            mag = abs(a)
            if j == 0:
                body = str(mag)
            else:
                power = self.variable if j == 1 else f"{self.variable}^{j}"
                body = power if mag == 1 else f"{mag}*{power}"
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


@dataclass(frozen=True)
class DiscriminantData:
    disc: int
    abs_disc: int
    weighted_disc: int

    def log_m_f(self, ctx):
        """log M_F = log max{2, sqrt(weighted_disc)} as an XReal."""
        if self.weighted_disc <= 4:
            return ctx.ln2()
        return ctx.log_of(self.weighted_disc) / 2

    def m_f(self, ctx):
        return self.log_m_f(ctx).exp()


class Certificate(str, enum.Enum):
    PROVEN = 'proven'
    UNPROVEN = 'unproven'
    REDUCIBLE = 'disproven_reducible'


@dataclass(frozen=True)
class IrreducibilityResult:
    status: Certificate
    witness: Optional[int] = None
    reason: str = ''


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].isspace():
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            offset = len(text[pos:]) - len(text[pos:].lstrip())
            raise PolynomialSyntaxError(f"unexpected character {text[pos + offset]!r}", pos + offset)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


def parse_poly(text: str) -> IntPolynomial:
    """Parse e.g. "2*k^6 + 3" into an IntPolynomial."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolynomialSyntaxError("empty polynomial", 0)
    coeffs = {}
    variable = None
    i = 0

    def peek(kind=None, value=None):
        if i >= len(tokens):
            return False
        tok_kind, tok_value, _ = tokens[i]
        return (kind is None or tok_kind == kind) and (value is None or tok_value == value)

    def position():
        return tokens[i][2] if i < len(tokens) else len(text)

    sign = 1
    if peek('op', '-') or peek('op', '+'):
        sign = -1 if tokens[i][1] == '-' else 1
        i += 1

    while True:
        coef = None
        power = 0
        if peek('int'):
            coef = int(tokens[i][1])
            i += 1
            if peek('op', '*'):
                i += 1
                if not peek('var'):
                    raise PolynomialSyntaxError("expected variable after '*'", position())
        if peek('var'):
            letter = tokens[i][1]
            if variable is None:
                variable = letter
            elif letter != variable:
                raise PolynomialSyntaxError(f"second variable {letter!r}", position())
            i += 1
            power = 1
            if peek('op', '^'):
                i += 1
                if not peek('int'):
                    raise PolynomialSyntaxError("expected exponent after '^'", position())
                power = int(tokens[i][1])
                i += 1
        elif coef is None:
            raise PolynomialSyntaxError("expected term", position())
        coeffs[power] = coeffs.get(power, 0) + sign * (1 if coef is None else coef)

        if i >= len(tokens):
            break
        if peek('op', '+') or peek('op', '-'):
            sign = -1 if tokens[i][1] == '-' else 1
            i += 1
            if i >= len(tokens):
                raise PolynomialSyntaxError("expected term", position())
            continue
        raise PolynomialSyntaxError(f"unexpected {tokens[i][1]!r}", position())

    dense = [0] * (max(coeffs) + 1)
    for power, value in coeffs.items():
        dense[power] = value
    return IntPolynomial(tuple(dense), variable or 'k')


def discriminant(F: IntPolynomial) -> DiscriminantData:
    """
    Discriminant, its absolute value and the weighted discriminant
    |c|^((d-1)(d-2)) |D_F|. Degree one polynomials get D_F = 1.
    """
    if F.degree < 1:
        raise InputError("discriminant needs degree at least 1")
    if F.degree == 1:
        return DiscriminantData(1, 1, 1)
    disc = int(F.to_sympy().discriminant())
    if disc == 0:
        raise PolynomialError(f"{F} is not squarefree, cannot be irreducible")
    d = F.degree
    weighted = abs(F.leading) ** ((d - 1) * (d - 2)) * abs(disc)
    return DiscriminantData(disc, abs(disc), weighted)


def _has_rational_root(F: IntPolynomial) -> Optional[Tuple[int, int]]:
    a0, c = F.coeffs[0], F.leading
    if a0 == 0:
        return (0, 1)
    d = F.degree
    for q in divisors(abs(c)):
        for p in divisors(abs(a0)):
            for num in (p, -p):
                if math.gcd(num, q) != 1:
                    continue
                if sum(a * num ** j * q ** (d - j) for j, a in enumerate(F.coeffs)) == 0:
                    return (num, q)
    return None


def irreducibility_certificate(F: IntPolynomial, prime_budget: int = 200) -> IrreducibilityResult:
    """
    Try to certify irreducibility over the integers.

    Proven when F is primitive and irreducible modulo a prime p <= budget with
    p not dividing c*D_F (or, for degree <= 3, has no rational root);
    reducible when a rational root or nontrivial content is found.
    """
    if F.degree < 1:
        raise InputError("irreducibility needs degree at least 1")
    if F.content > 1:
        return IrreducibilityResult(Certificate.REDUCIBLE, reason=f"content {F.content}")
    if F.degree == 1:
        return IrreducibilityResult(Certificate.PROVEN, reason="linear")
    root = _has_rational_root(F)
    if root is not None:
        return IrreducibilityResult(Certificate.REDUCIBLE, reason=f"rational root {root[0]}/{root[1]}")
    if F.degree <= 3:
        return IrreducibilityResult(Certificate.PROVEN, reason="no rational root")

    bad = F.leading * discriminant(F).disc
    for p in primerange(2, prime_budget + 1):
        if bad % p == 0:
            continue
        _, monic = gf_monic(F.mod(p), p, ZZ)
        if gf_irreducible_p(monic, p, ZZ):
            return IrreducibilityResult(Certificate.PROVEN, witness=int(p), reason=f"irreducible mod {p}")

    logger.warning("Could not certify irreducibility of %s with primes up to %d", F, prime_budget)
    return IrreducibilityResult(Certificate.UNPROVEN, reason=f"reducible mod every prime <= {prime_budget}")


def fixed_divisor_check(F: IntPolynomial) -> Optional[int]:
    """Smallest prime dividing F(n) for every n, or None."""
    candidates = {int(p) for p in primerange(2, F.degree + 1)}
    candidates.update(int(p) for p in primefactors(F.content))
    for p in sorted(candidates):
        if all(F(n) % p == 0 for n in range(p)):
            return int(p)
    return None


def product(polys: Sequence[IntPolynomial]) -> IntPolynomial:
    out = polys[0]
    for poly in polys[1:]:
        out = out * poly
    return out
