"""
Sieve service for explicit-sieve.

Evaluates the explicit constant tower m0..m11 of Selberg's upper sieve,
checks the admissibility conditions on a threshold X, scans the
exp(b0 * 10^b1) grid for the minimal admissible X and assembles the
final bound constants.

Every quantity is an XReal enclosure, so "passed" means the inequality
holds for the rigorous bounds and never for a rounded midpoint. Large
arguments are passed as natural logarithms (log w, log z, log X).
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from config.settings import B1_MAX, B1_MIN, K0, LADDER_POINTS, LADDER_RATIO, WORKERS
from services.constants_service import PolySystem, QfVariant, Regime, lf
from services.euler_service import product_lower_bound
from utils.errors import ConditionFailure, DomainError, IndeterminateError, InputError
from utils.polyalg import IntPolynomial
from utils.rignum import NumericContext, Ordering, XReal, xmax, xmin

logger = logging.getLogger(__name__)

C1_VARIANTS = ('printed', 'generic')


@dataclass(frozen=True)
class SieveParams:
    """Sieve dimension kappa and the density constants A1, A2, L."""

    kappa: int
    a1: int
    a2: XReal
    l: XReal
    lam: Optional[Fraction] = None
    k0: int = K0

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, 'lam', Fraction(2 * self.kappa))
        else:
            object.__setattr__(self, 'lam', Fraction(self.lam))
        if self.kappa < 1:
            raise InputError(f"kappa must be at least 1, got {self.kappa}")
        if self.a1 <= 1:
            raise InputError(f"A1 must exceed 1, got {self.a1}")
        if self.a2.sign <= 0 or self.l.sign <= 0:
            raise InputError("A2 and L must be positive")
        if self.k0 < 2:
            raise InputError(f"k0 must be at least 2, got {self.k0}")
        if self.lam <= 0:
            raise InputError(f"lambda must be positive, got {self.lam}")

    @classmethod
    def for_system(cls, system: PolySystem, regime: Regime, ctx: NumericContext,
                   variant: QfVariant = QfVariant.PRINTED, lam=None, k0: int = K0) -> SieveParams:
        """kappa = g, A1 = deg_F + 1 and A2 = L = L_F for a polynomial system."""
        a2 = lf(system, regime, ctx, variant)
        return cls(system.kappa, system.a1, a2, a2, lam, k0)

    @property
    def ctx(self) -> NumericContext:
        return self.a2.ctx

    @property
    def a1a2(self) -> XReal:
        return self.a1 * self.a2

    def to_json(self) -> Dict[str, Any]:
        return {
            'kappa': self.kappa,
            'A1': self.a1,
            'A2': self.a2.to_json(),
            'L': self.l.to_json(),
            'lambda': str(self.lam),
            'k0': self.k0,
        }


def _require_less(left: XReal, right: XReal, message: str) -> None:
    order = left.compare(right)
    if order is Ordering.INDETERMINATE:
        raise IndeterminateError(f"cannot decide {message}")
    if order is not Ordering.LESS:
        raise DomainError(message)


def _exp_neg(x: XReal) -> XReal:
    """exp(-x) for a value whose exponential may leave the float range."""
    return x.ctx.from_log(-x.enclosure())


def _gamma_factor(params: SieveParams) -> XReal:
    """Gamma(kappa + 1) e^(kappa gamma)."""
    ctx = params.ctx
    return ctx.factorial(params.kappa) * (params.kappa * ctx.euler_gamma()).exp()


def m0(log_w: XReal, params: SieveParams) -> XReal:
    """
    Error term of the product W(z) past w.

    Args:
        log_w: log w, which must exceed A1 A2
        params: Sieve parameters

    Returns:
        Upper bound m0(w)
    """
    ctx, kappa, a1 = params.ctx, params.kappa, params.a1
    a2, l = params.a2, log_w
    _require_less(params.a1a2, l, "log w above A1 A2 (below convergence threshold)")
    u = a2 / l
    head = xmax(u + params.a1a2 / l * (kappa + u), params.l / l)
    quadratic = Fraction(3 * kappa, 2) / (l * l)
    # kappa log(w/(w-1)) <= kappa y/(1-y) with y = 1/w
    y = _exp_neg(l)
    harmonic = kappa * y / (1 - y)
    q = params.a1a2 / l
    series = ctx.zero()
    for k in range(2, params.k0 + 1):
        series = series + q ** (k - 2) / k
    series = series + q ** (params.k0 - 1) / ((params.k0 + 1) * (1 - q))
    tail = a1 * a1 * a2 / l * (kappa + u) * series
    return head + quadratic + harmonic + tail


def m0_hat(log_z: XReal, params: SieveParams, m0_value: Optional[XReal] = None) -> XReal:
    """log z ((1 + 1/log^2 z)^kappa (1 + m0 e^m0) - 1)."""
    m = m0(log_z, params) if m0_value is None else m0_value
    growth = (1 + 1 / (log_z * log_z)) ** params.kappa * (1 + m * m.exp())
    return log_z * (growth - 1)


def m1(x, d, params: SieveParams) -> XReal:
    """m1(x, d) with log sqrt(x/d) in every denominator."""
    ctx = params.ctx
    ell = ctx.log_of(Fraction(x) / Fraction(d)) / 2
    if ell.sign <= 0:
        raise DomainError("m1 needs x/d > 1")
    a2 = params.a2
    return a2 * (params.kappa * ctx.ln2() + a2 / ell + params.a1a2 / ell * (params.kappa + a2 / ell))


def _m2_exponent(params: SieveParams) -> XReal:
    ln2 = params.ctx.ln2()
    return params.a2 / ln2 * (1 + params.a1 * params.kappa + params.a1a2 / ln2)


def m2(params: SieveParams) -> XReal:
    ln2 = params.ctx.ln2()
    return _m2_exponent(params).exp() / ln2 ** params.kappa


def m4(params: SieveParams) -> XReal:
    ctx = params.ctx
    e, ln2 = ctx.e(), ctx.ln2()
    return 2 * params.kappa * e + params.a2 * e / ln2 + ln2


def m3(log_z: XReal, params: SieveParams) -> XReal:
    ctx = params.ctx
    ln2 = ctx.ln2()
    lam = ctx.real(params.lam)
    exponent = (_m2_exponent(params) + params.l / ln2 - lam
                + (Fraction(2 * params.kappa) / params.lam + params.a2 / log_z) * lam.exp())
    return 1 + 2 * m4(params) ** params.kappa * exponent.exp()


def r(log_z: XReal, params: SieveParams, m1_half: Optional[XReal] = None) -> XReal:
    if log_z.sign <= 0:
        raise DomainError("r(z) needs z > 1")
    m1_half = m1(1, Fraction(1, 2), params) if m1_half is None else m1_half
    return (params.a2 + m1_half) / log_z


def m7(log_z: XReal, r_value: XReal, params: SieveParams) -> XReal:
    _require_less(r_value, r_value.ctx.one(), "r(z) < 1 for m6 and m7")
    ratio = (params.kappa + 1) * r_value / (1 - r_value)
    return (ratio.exp() - 1) / log_z


def m6(log_z: XReal, r_value: XReal, params: SieveParams) -> XReal:
    seven = m7(log_z, r_value, params)
    rest = r_value / (1 - r_value)
    return rest * log_z + seven + seven * rest


def m5_branches(log_z: XReal, params: SieveParams, m0_hat_value: XReal, r_value: XReal
                ) -> Tuple[XReal, Optional[XReal]]:
    """The Gamma branch and, when r < 1, the m6 branch."""
    first = log_z * (m3(log_z, params) / _gamma_factor(params) * (1 + m0_hat_value / log_z) - 1)
    try:
        six = m6(log_z, r_value, params)
    except DomainError:
        return first, None
    return first, six / (1 + six / log_z)


def m9(log_x: XReal, kappa: int) -> XReal:
    loglog = log_x.log()
    shrink = 1 - (4 * kappa + 1) * loglog / log_x
    if shrink.sign <= 0:
        raise DomainError("m9 needs (4 kappa + 1) log log X < log X")
    return (4 * kappa + 1) / shrink


def log_z0(log_x: XReal, kappa: int) -> XReal:
    """log z0 for z0^2 = X / log^(4 kappa + 1) X."""
    return (log_x - (4 * kappa + 1) * log_x.log()) / 2


@dataclass(frozen=True)
class SieveConstants:
    """The tower at z0, with m1 taken at (1, 1/2) as r(z) uses it."""

    log_x: XReal
    log_z0: XReal
    m0: XReal
    m0_hat: XReal
    m1_half: XReal
    m2: XReal
    m3: XReal
    m4: XReal
    m5: XReal
    m5_branches: Tuple[XReal, Optional[XReal]]
    m6: Optional[XReal]
    m7: Optional[XReal]
    r: XReal
    m8: XReal
    m9: XReal

    def to_json(self) -> Dict[str, Any]:
        optional = lambda x: x.to_json() if x is not None else None  # noqa: E731
        return {
            'log_X': self.log_x.to_json(),
            'log_z0': self.log_z0.to_json(),
            'm0': self.m0.to_json(),
            'm0_hat': self.m0_hat.to_json(),
            'm1(1,1/2)': self.m1_half.to_json(),
            'm2': self.m2.to_json(),
            'm3': self.m3.to_json(),
            'm4': self.m4.to_json(),
            'm5': self.m5.to_json(),
            'm5_branches': [optional(b) for b in self.m5_branches],
            'm6': optional(self.m6),
            'm7': optional(self.m7),
            'r': self.r.to_json(),
            'm8': self.m8.to_json(),
            'm9': self.m9.to_json(),
        }


def sieve_tower(log_x: XReal, params: SieveParams, log_z: Optional[XReal] = None) -> SieveConstants:
    """
    Evaluate m0..m9 at z0 (or at log_z when given) for the threshold X.

    Raises DomainError where a formula leaves its domain; m6 and m7 are
    left as None when r(z) >= 1.
    """
    kappa = params.kappa
    lz = log_z0(log_x, kappa) if log_z is None else log_z
    m0_value = m0(lz, params)
    hat = m0_hat(lz, params, m0_value)
    m1_half = m1(1, Fraction(1, 2), params)
    r_value = r(lz, params, m1_half)
    branches = m5_branches(lz, params, hat, r_value)
    m5_value = branches[0] if branches[1] is None else xmin(*branches)
    try:
        six, seven = m6(lz, r_value, params), m7(lz, r_value, params)
    except DomainError:
        logger.debug("r(z0) >= 1: m6 and m7 undefined")
        six = seven = None
    nine = m9(log_x, kappa)
    loglog = log_x.log()
    shrink = 1 - (4 * kappa + 1) * loglog / log_x
    two = m2(params)
    eight = (2 * m5_value / shrink
             + two ** 4 / (params.ctx.real(2) ** (4 * kappa) * _gamma_factor(params)) * (1 + hat / lz))
    return SieveConstants(log_x, lz, m0_value, hat, m1_half, two, m3(lz, params), m4(params), m5_value,
                          branches, six, seven, r_value, eight, nine)


def m0_by_k0(log_w: XReal, params: SieveParams, k0_values=(2, 10, 50)) -> Dict[int, XReal]:
    return {k0: m0(log_w, replace(params, k0=k0)) for k0 in k0_values}


# -- admissibility conditions ------------------------------------------

@dataclass(frozen=True)
class ConditionClause:
    name: str
    left: Optional[XReal]
    right: Optional[XReal]
    passed: bool
    indeterminate: bool = False
    note: str = ''

    @property
    def violation(self) -> float:
        """log(left/right) for a failed clause; inf when it could not be evaluated."""
        if self.passed:
            return -math.inf
        if self.left is None or self.right is None or self.left.sign <= 0 or self.right.sign <= 0:
            return math.inf
        return float(self.left.logmag.mid) - float(self.right.logmag.mid)

    def to_json(self) -> Dict[str, Any]:
        return {
            'clause': self.name,
            'left': self.left.to_json() if self.left is not None else None,
            'right': self.right.to_json() if self.right is not None else None,
            'passed': self.passed,
            'indeterminate': self.indeterminate,
            'note': self.note,
        }


@dataclass(frozen=True)
class ConditionReport:
    log_x: XReal
    log_z0: XReal
    clauses: Tuple[ConditionClause, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    @property
    def indeterminate(self) -> bool:
        return any(c.indeterminate for c in self.clauses)

    def most_violated(self) -> Optional[ConditionClause]:
        failing = [c for c in self.clauses if not c.passed]
        if not failing:
            return None
        return max(failing, key=lambda c: c.violation)

    def to_json(self) -> Dict[str, Any]:
        return {
            'log_X': self.log_x.to_json(),
            'log_z0': self.log_z0.to_json(),
            'passed': self.passed,
            'clauses': [c.to_json() for c in self.clauses],
            'note': 'the requirement that m6(z) be of moderate size is not a checkable clause',
        }


def _clause(name: str, left: XReal, right: XReal) -> ConditionClause:
    """Passes only when left < right is decided for the enclosures."""
    order = left.compare(right)
    if order is Ordering.INDETERMINATE:
        return ConditionClause(name, left, right, False, True, 'not decided at working precision')
    return ConditionClause(name, left, right, order is Ordering.LESS)


def _skipped(name: str, note: str) -> ConditionClause:
    return ConditionClause(name, None, None, False, note=note)


def check_conditions(log_x: XReal, params: SieveParams) -> ConditionReport:
    """
    Evaluate the four admissibility clauses at X.

    Clauses whose formulas need an earlier clause (m0 needs log z0 > A1 A2,
    the last clause needs r < 1) are reported as skipped failures.
    """
    ctx, kappa = params.ctx, params.kappa
    lz = log_z0(log_x, kappa)
    clauses: List[ConditionClause] = []

    threshold = xmax(ctx.ln2(), params.a1a2)
    first = _clause('z0 > max(2, exp(A1 A2))', threshold, lz)
    clauses.append(first)

    r_value = None
    if lz.sign > 0:
        r_value = r(lz, params)
        second = _clause('r(z0) < 1', r_value, ctx.one())
    else:
        second = _skipped('r(z0) < 1', 'z0 <= 1')
    clauses.append(second)

    if first.passed:
        try:
            clauses.append(_clause('m0_hat(z0) < log z0', m0_hat(lz, params), lz))
        except IndeterminateError as exc:
            clauses.append(ConditionClause('m0_hat(z0) < log z0', None, lz, False, True, str(exc)))
        except DomainError as exc:
            clauses.append(ConditionClause('m0_hat(z0) < log z0', None, lz, False, note=str(exc)))
    else:
        clauses.append(_skipped('m0_hat(z0) < log z0', 'needs log z0 > A1 A2'))

    name = '(kappa + 1) r(z0) / (1 - r(z0)) < 1'
    if second.passed:
        clauses.append(_clause(name, (kappa + 1) * r_value / (1 - r_value), ctx.one()))
    else:
        clauses.append(_skipped(name, 'needs r(z0) < 1'))

    return ConditionReport(log_x, lz, tuple(clauses))


# -- threshold search ----------------------------------------------------

ParamsFactory = Callable[[NumericContext], SieveParams]


@dataclass(frozen=True)
class GridPoint:
    b0: Fraction
    b1: int

    @property
    def log_x(self) -> Fraction:
        return self.b0 * 10 ** self.b1

    def __str__(self) -> str:
        return f"{float(self.b0):g}e{self.b1}"


@dataclass
class BoundReport:
    """Minimal admissible X for a system and, once assembled, its final constants."""

    system: str
    regime: Regime
    point: GridPoint
    grid_step: Fraction
    params: SieveParams
    conditions: ConditionReport
    constants: SieveConstants
    ladder: List[Tuple[Fraction, bool]]
    minimality_certified: bool
    digits: int
    m0_k0: Dict[int, XReal] = field(default_factory=dict)
    tau: Optional[TauG1] = None
    shifted: Optional[ShiftedBound] = None
    euler: Any = None
    statement: str = ''
    notes: List[str] = field(default_factory=list)

    @property
    def log_x(self) -> Fraction:
        return self.point.log_x

    @property
    def log_tau(self) -> Optional[XReal]:
        if self.tau is not None:
            return self.tau.c2.log()
        if self.shifted is not None:
            return self.shifted.m11.log()
        return None

    def to_json(self) -> Dict[str, Any]:
        log_tau = self.log_tau
        return {
            'system': self.system,
            'regime': self.regime.value,
            'conditional_on_grh': self.regime is Regime.GRH,
            'log_X': str(self.log_x),
            'b0': str(self.point.b0),
            'b1': self.point.b1,
            'grid_step': str(self.grid_step),
            'log_base': 'natural',
            'digits': self.digits,
            'params': self.params.to_json(),
            'conditions': self.conditions.to_json(),
            'constants': self.constants.to_json(),
            'm0_by_k0': {str(k): v.to_json() for k, v in self.m0_k0.items()},
            'ladder': [{'log_X': str(lx), 'passed': ok} for lx, ok in self.ladder],
            'minimality_certified': self.minimality_certified,
            'tau': self.tau.to_json() if self.tau else None,
            'shifted': self.shifted.to_json() if self.shifted else None,
            'log_tau': log_tau.to_json() if log_tau is not None else None,
            'euler': self.euler.to_json() if self.euler is not None else None,
            'statement': self.statement,
            'notes': list(self.notes),
        }


class _Evaluator:
    """Condition checks at exact log X values with one precision doubling on indeterminate results."""

    def __init__(self, factory: ParamsFactory, ctx: NumericContext):
        self.factory = factory
        self.ctx = ctx
        self._params: Dict[int, SieveParams] = {}

    def params(self, ctx: NumericContext) -> SieveParams:
        if ctx.digits not in self._params:
            self._params[ctx.digits] = self.factory(ctx)
        return self._params[ctx.digits]

    def __call__(self, log_x: Fraction) -> ConditionReport:
        report = check_conditions(self.ctx.real(log_x), self.params(self.ctx))
        if report.indeterminate:
            wider = self.widened
            logger.info("Indeterminate condition at log X = %s, retrying at %d digits", log_x, wider.digits)
            report = check_conditions(wider.real(log_x), self.params(wider))
        return report

    @property
    def widened(self) -> NumericContext:
        if not hasattr(self, '_widened'):
            self._widened = self.ctx.widened()
        return self._widened


def _decade_points(b1: int, step: Fraction, first_decade: bool) -> List[GridPoint]:
    """b0 in (0, 10); later decades start at b0 = 1 since smaller b0 repeat the previous decade."""
    start = step if first_decade else Fraction(1)
    count = int((Fraction(10) - start) / step)
    return [GridPoint(start + k * step, b1) for k in range(count)]


def find_minimal_x(factory: ParamsFactory, ctx: NumericContext, *, label: str = '',
                   regime: Regime = Regime.UNCONDITIONAL, grid_step='0.1', b1_min: int = B1_MIN,
                   b1_max: int = B1_MAX, workers: int = WORKERS) -> BoundReport:
    """
    Scan X = exp(b0 10^b1) for the smallest grid point passing every condition.

    Args:
        factory: Builds SieveParams for a numeric context
        ctx: Numeric context
        label: System label for the report
        regime: Regime the parameters were computed in
        grid_step: Step of b0, 0.1 or 0.01
        b1_min, b1_max: Range of decades
        workers: Threads for the per-decade pre-check

    Returns:
        BoundReport with conditions, ladder and constants at the minimal X

    Raises:
        ConditionFailure: No grid point passes, or persistence fails on the ladder
    """
    step = Fraction(str(grid_step))
    if step <= 0 or step >= 10:
        raise InputError(f"grid step must lie in (0, 10), got {grid_step}")
    evaluate = _Evaluator(factory, ctx)
    decades = list(range(b1_min, b1_max + 1))
    tops = [_decade_points(b1, step, b1 == b1_min)[-1] for b1 in decades]

    found = None
    last_report = None
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for start in range(0, len(tops), max(1, workers)):
            chunk = tops[start:start + max(1, workers)]
            reports = list(pool.map(lambda point: evaluate(point.log_x), chunk))
            for point, report in zip(chunk, reports):
                logger.debug("decade %d: top %s %s", point.b1, point, 'passes' if report.passed else 'fails')
                last_report = report
                if report.passed:
                    found = point
                    break
            if found is not None:
                break

    if found is None:
        worst = last_report.most_violated() if last_report else None
        clause = worst.name if worst else None
        raise ConditionFailure(f"no admissible X up to exp(9.9e{b1_max}); most violated: {clause}", clause)

    point, report = None, None
    for candidate in _decade_points(found.b1, step, found.b1 == b1_min):
        candidate_report = evaluate(candidate.log_x)
        if candidate_report.passed:
            point, report = candidate, candidate_report
            break

    ratio = Fraction(LADDER_RATIO)
    ladder = [(point.log_x, True)]
    for j in range(1, LADDER_POINTS):
        log_x = point.log_x * ratio ** j
        ok = evaluate(log_x).passed
        ladder.append((log_x, ok))
        if not ok:
            raise ConditionFailure(f"conditions pass at log X = {point.log_x} but fail at log X = {log_x}",
                                   'persistence')

    notes = ["log X is a natural logarithm"]
    previous = point.b0 - step
    if previous > 0:
        certified = not evaluate(previous * 10 ** point.b1).passed
        if not certified:
            logger.warning("Grid point before %s also passes; scan was not monotone", point)
    else:
        certified = True
        notes.append("no grid point precedes the reported X")

    params = evaluate.params(ctx)
    log_x = ctx.real(point.log_x)
    constants = sieve_tower(log_x, params)
    return BoundReport(
        system=label,
        regime=Regime(regime),
        point=point,
        grid_step=step,
        params=params,
        conditions=report,
        constants=constants,
        ladder=ladder,
        minimality_certified=certified,
        digits=ctx.digits,
        m0_k0=m0_by_k0(constants.log_z0, params),
        notes=notes,
    )


def find_minimal_x_for_system(system: PolySystem, regime: Regime, ctx: NumericContext, *,
                              variant: QfVariant = QfVariant.PRINTED, lam=None, k0: int = K0,
                              **grid) -> BoundReport:
    regime = Regime(regime)

    def factory(c: NumericContext) -> SieveParams:
        return SieveParams.for_system(system, regime, c, variant, lam, k0)

    report = find_minimal_x(factory, ctx, label=system.label, regime=regime, **grid)
    if regime is Regime.GRH:
        report.notes.append("conditional on GRH")
    return report


# -- final constants -----------------------------------------------------

def combined_coefficient(m8_value: XReal, m9_value: XReal, log_x: XReal, kappa: int) -> XReal:
    """
    m with (1 + m8/log x)(1 + m9 log log x/log x)^kappa = 1 + m log log x/log x.

    At kappa = 1 this is m10 = m9 + m8/log log x + m8 m9/log x; at kappa = 2
    it is m11.
    """
    loglog = log_x.log()
    t = loglog / log_x
    # (1 + m9 t)^kappa - 1 expanded, every term positive
    b = log_x.ctx.zero()
    for j in range(1, kappa + 1):
        b = b + math.comb(kappa, j) * (m9_value * t) ** j
    return m8_value / loglog * (1 + b) + b / t


def log_mfrak(factors, log_x: XReal) -> XReal:
    """
    Log of the bound on max{n : F_i(n) < sqrt(X)} for any factor.

    Degree d >= 2 uses max{X^(1/(2(d-1))), sum_{j<d} |a_j|/a_d}; a linear
    factor a1 k + a0 uses (sqrt(X) - a0)/a1 directly.
    """
    ctx = log_x.ctx
    best = None
    for F in factors:
        if F.degree >= 2:
            value = log_x / (2 * (F.degree - 1))
            spread = Fraction(sum(abs(a) for a in F.coeffs[:-1]), F.leading)
            if spread > 0:
                value = xmax(value, ctx.log_of(spread))
        else:
            a0, a1 = F.coeffs
            root = ctx.from_log(log_x.enclosure() / 2) - a0
            if root.sign <= 0:
                continue
            value = (root / a1).log()
        best = value if best is None else xmax(best, value)
    if best is None:
        raise DomainError("sqrt(X) lies below every linear factor's constant term")
    return best


@dataclass(frozen=True)
class TauG1:
    c0: XReal
    c1: XReal
    c1_printed: XReal
    c1_generic: XReal
    c1_variant: str
    c2: XReal
    log_mfrak: XReal

    def to_json(self) -> Dict[str, Any]:
        return {
            'c0': self.c0.to_json(),
            'c1': self.c1.to_json(),
            'c1_printed': self.c1_printed.to_json(),
            'c1_generic': self.c1_generic.to_json(),
            'c1_variant': self.c1_variant,
            'c2': self.c2.to_json(),
            'log_tau': self.c2.log().to_json(),
            'log_mfrak': self.log_mfrak.to_json(),
        }


def tau_g1(F: IntPolynomial, log_x: XReal, params: SieveParams, c1_variant: str = 'printed',
           constants: Optional[SieveConstants] = None) -> TauG1:
    """
    c0, c1 and c2 = tau for a single polynomial at the threshold X.

    c1 carries the Euler-product lower bound as a prefactor; ``printed``
    uses exp(2L(2 + L)), ``generic`` uses exp(A1 A2 (1 + kappa + A2)).
    """
    if c1_variant not in C1_VARIANTS:
        raise InputError(f"c1 variant must be one of {', '.join(C1_VARIANTS)}")
    if params.kappa != 1:
        raise InputError("tau_g1 needs a single polynomial (kappa = 1)")
    ctx = params.ctx
    constants = constants or sieve_tower(log_x, params)
    loglog = log_x.log()
    c0 = combined_coefficient(constants.m8, constants.m9, log_x, 1)

    mf = log_mfrak([F], log_x)
    common = mf - log_x + loglog
    a2 = params.a2
    printed = ctx.from_log((2 * a2 * (2 + a2) + common).enclosure())
    generic = ctx.from_log((params.a1a2 * (1 + params.kappa + a2) + common).enclosure())
    c1 = printed if c1_variant == 'printed' else generic
    c2 = c0 * (1 + c1 / 2) + c1 * log_x / (2 * loglog)
    return TauG1(c0, c1, printed, generic, c1_variant, c2, mf)


@dataclass(frozen=True)
class ShiftedBound:
    """Constants of the bound 2^k Gamma(k+1) S (1 + e^absorption)(1 + m11 log log x/log x) x/log^k x."""

    kappa: int
    leading: int
    m11: XReal
    singular_lo: XReal
    absorption: XReal

    def to_json(self) -> Dict[str, Any]:
        return {
            'kappa': self.kappa,
            'leading_factor': self.leading,
            'm11': self.m11.to_json(),
            'log_m11': self.m11.log().to_json(),
            'singular_series_lower': self.singular_lo.to_json(),
            'absorption_exponent': {
                'value': str(self.absorption.decimal(digits=12)),
                'sign': self.absorption.sign,
            },
        }


def tau_shifted(system: PolySystem, log_x: XReal, params: SieveParams, singular_lo: XReal,
                constants: Optional[SieveConstants] = None) -> ShiftedBound:
    """
    Final constants for a system counted through its additive term.

    ``system`` is the sieved system (k F_1...F_g for prime-argument counts).
    The term max{n : F_i(n) < sqrt(X)} is absorbed into the main term: the
    returned exponent is log of its share relative to
    leading * S * x / log^kappa x at X, which only decreases for larger x.
    """
    if singular_lo.sign <= 0:
        raise DomainError("singular series lower bound must be positive")
    constants = constants or sieve_tower(log_x, params)
    kappa = params.kappa
    leading = 2 ** kappa * math.factorial(kappa)
    m11 = combined_coefficient(constants.m8, constants.m9, log_x, kappa)
    absorption = (log_mfrak(system.factors, log_x) - (leading * singular_lo).log()
                  - log_x + kappa * log_x.log())
    return ShiftedBound(kappa, leading, m11, singular_lo, absorption)


def _sci(value: XReal, digits: int = 6) -> str:
    return '{:.{}e}'.format(value.decimal(digits=digits), digits - 1)


def render_statement(report: BoundReport, base: Optional[PolySystem] = None) -> str:
    """Human-readable form of the final inequality."""
    log_x = f"{float(report.log_x):.2e}"
    regime = ' (assuming GRH)' if report.regime is Regime.GRH else ''
    if report.tau is not None:
        return (f"For log x >= {log_x}{regime}: pi_F(x) < 2 (1 + exp({_sci(report.tau.c2.log())}) "
                f"log log x / log x) prod_p (1 - rho_F(p)/p)(1 - 1/p)^-1 x / log x, F = {report.system}")
    if report.shifted is not None:
        s = report.shifted
        what = f"primes p with {', '.join(str(F) for F in base.factors)} prime" if base else report.system
        return (f"For log x >= {log_x}{regime}: #{{{what}, p <= x}} <= {s.leading} S "
                f"(1 + exp({_sci(s.absorption)})) (1 + exp({_sci(s.m11.log())}) log log x / log x) "
                f"x / log^{s.kappa} x, S >= {_sci(s.singular_lo, 11)}")
    return ''


def assemble_bound(report: BoundReport, system: PolySystem, *, singular_lo: Optional[XReal] = None,
                   c1_variant: str = 'printed', euler: Any = None) -> BoundReport:
    """
    Attach the final constants to a passing threshold report.

    Single polynomials get c0, c1, c2; shifted systems and systems with
    g >= 2 get m11 and the absorption exponent, which needs a lower bound
    on the singular series (the generic exp(-A1 A2 (1 + kappa + A2)) is
    used when none is given).
    """
    if not report.conditions.passed:
        worst = report.conditions.most_violated()
        raise ConditionFailure("conditions fail at the requested X", worst.name if worst else None)
    params = report.params
    log_x = params.ctx.real(report.log_x)
    if system.g == 1 and not system.is_shifted:
        tau = tau_g1(system.factors[0], log_x, params, c1_variant, report.constants)
        report = replace(report, tau=tau, euler=euler)
    else:
        lower = singular_lo if singular_lo is not None else product_lower_bound(params)
        shifted = tau_shifted(system, log_x, params, lower, report.constants)
        report = replace(report, shifted=shifted, euler=euler)
    report.statement = render_statement(report, system.base)
    return report


def threshold_report(system: PolySystem, log_x, regime: Regime, ctx: NumericContext, *,
                     variant: QfVariant = QfVariant.PRINTED, lam=None, k0: int = K0) -> BoundReport:
    """BoundReport at a user-chosen X instead of the grid minimum."""
    params = SieveParams.for_system(system, regime, ctx, variant, lam, k0)
    exact = Fraction(str(log_x)) if not isinstance(log_x, Fraction) else log_x
    value = ctx.real(exact)
    conditions = check_conditions(value, params)
    if not conditions.passed:
        worst = conditions.most_violated()
        raise ConditionFailure(f"conditions fail at log X = {exact}", worst.name if worst else None)
    constants = sieve_tower(value, params)
    exponent = math.floor(math.log10(exact)) if exact >= 1 else 0
    return BoundReport(system.label, Regime(regime), GridPoint(exact / 10 ** exponent, exponent),
                       Fraction(0), params, conditions, constants, [(exact, True)], False, ctx.digits,
                       m0_by_k0(constants.log_z0, params), notes=["X chosen by the caller"])


# -- W and G bounds for small instances ----------------------------------

def w_upper_bound(log_z: XReal, params: SieveParams) -> XReal:
    """W(z) <= exp(kappa log log 2 + L/log 2) / log^kappa z."""
    ln2 = params.ctx.ln2()
    return (params.kappa * ln2.log() + params.l / ln2).exp() / log_z ** params.kappa


def w_reciprocal_bound(log_z: XReal, params: SieveParams) -> XReal:
    """1/W(z) <= m2 log^kappa z."""
    return m2(params) * log_z ** params.kappa


def g_reciprocal_bound(w_value, log_z: XReal, params: SieveParams) -> XReal:
    """1/G(z) <= W(z) m3(z, lambda)."""
    return params.ctx.real(w_value) * m3(log_z, params)
