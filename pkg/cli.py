"""
Command-line front end for explicit-sieve.

Reports go to stdout, or to --out FILE; logging goes to stderr.

Example:
    python cli.py find-x "k^2 + 3" --grh
    python cli.py table1 --sensitivity --csv --out table1.csv
    python cli.py check --suite selberg --count 200
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from config.settings import LOG_LEVEL, OUTPUT_FORMATS, RunConfig, load_run_config
from services.constants_service import PolySystem, QfVariant, Regime, lf, lf_empirical_check, qf
from services.euler_service import singular_series, twin_constant_accelerated, twin_constant_direct
from services.report_service import envelope, render, reproduce_sophie_germain, reproduce_table1
from services.sieve_service import (C1_VARIANTS, SieveParams, assemble_bound, find_minimal_x_for_system,
                                    threshold_report)
from services.verify_service import (count_pi_F, count_window, lemma_envelope_checks, random_instances,
                                     remainder_records, rho_identity_checks, selberg_inequality_check,
                                     sophie_germain_count)
from utils.errors import InputError, SieveError
from utils.modarith import rho_table
from utils.rignum import NumericContext

logger = logging.getLogger(__name__)

SUITES = ('selberg', 'lemmas', 'rho', 'remainder')

# (payload result, table rows or None, passed)
Outcome = Tuple[Dict[str, Any], Optional[List[Dict[str, Any]]], bool]


def _system(args: argparse.Namespace) -> PolySystem:
    system = PolySystem.parse(args.polys)
    if not system.irreducibility_proven:
        logger.warning("Irreducibility of %s is not proven; continuing", system.label)
    return system.shifted() if getattr(args, 'shifted', False) else system


def _context(config: RunConfig) -> NumericContext:
    return NumericContext(config.digits, config.rounding)


def _regime(config: RunConfig) -> Regime:
    return Regime(config.regime)


def cmd_analyze(args, config: RunConfig) -> Outcome:
    system = _system(args)
    ctx = _context(config)
    factors = {str(F): {r.value: qf(F, ctx).q(r).to_json() for r in Regime} for F in system.factors}
    result = {
        'system': system.describe(),
        'Q_F': factors,
        'L_F': lf(system, _regime(config), ctx).to_json(),
    }
    return result, None, True


def cmd_rho_table(args, config: RunConfig) -> Outcome:
    system = _system(args)
    table = rho_table(system.product, args.limit)
    rows = [{'p': p, 'rho': v} for p, v in table.rows()]
    return {'F': str(system.product), 'limit': args.limit, 'rows': rows}, rows, True


def cmd_qf(args, config: RunConfig) -> Outcome:
    system = _system(args)
    ctx = _context(config)
    variant = QfVariant(args.variant)
    values = [qf(F, ctx, variant) for F in system.factors]
    rows = [{'F': str(F), **{k: str(v) for k, v in q.to_json().items()}} for F, q in zip(system.factors, values)]
    return {'factors': [q.to_json() for q in values]}, rows, True


def cmd_lf(args, config: RunConfig) -> Outcome:
    system = _system(args)
    ctx = _context(config)
    value = lf(system, _regime(config), ctx, QfVariant(args.variant))
    result: Dict[str, Any] = {'system': system.label, 'L_F': value.to_json()}
    if args.w is not None and args.z is not None:
        residual = lf_empirical_check(system, args.w, args.z)
        result['empirical'] = {'w': args.w, 'z': args.z, 'residual_upper': repr(residual),
                               'within': residual <= float(value)}
    return result, None, True


def cmd_find_x(args, config: RunConfig) -> Outcome:
    system = _system(args)
    report = find_minimal_x_for_system(system, _regime(config), _context(config),
                                       variant=QfVariant(args.variant), lam=config.lam, k0=config.k0,
                                       grid_step=config.grid_step, b1_max=config.b1_max,
                                       workers=config.workers)
    return report.to_json(), None, True


def cmd_tau(args, config: RunConfig) -> Outcome:
    system = _system(args)
    ctx = _context(config)
    regime = _regime(config)
    variant = QfVariant(args.variant)
    if args.log_x is not None:
        report = threshold_report(system, Fraction(args.log_x), regime, ctx, variant=variant,
                                  lam=config.lam, k0=config.k0)
    else:
        report = find_minimal_x_for_system(system, regime, ctx, variant=variant, lam=config.lam,
                                           k0=config.k0, grid_step=config.grid_step,
                                           b1_max=config.b1_max, workers=config.workers)
    singular, euler = None, None
    if system.g > 1 or system.is_shifted:
        euler = singular_series(system, cutoff=config.cutoff, ctx=ctx, regime=regime,
                                workers=config.workers)
        singular = euler.lo
    report = assemble_bound(report, system, singular_lo=singular, c1_variant=args.c1, euler=euler)
    return report.to_json(), None, True


def cmd_table1(args, config: RunConfig) -> Outcome:
    regimes = [Regime(r) for r in args.regimes] if args.regimes else [Regime.GRH, Regime.UNCONDITIONAL]
    result = reproduce_table1(config, _context(config), sensitivity=args.sensitivity,
                              cases=args.cases or (0, 1, 2, 3), regimes=regimes)
    rows = [row.to_row() for row in result.rows]
    return result.to_json(), rows, result.passed


def cmd_sophie_germain(args, config: RunConfig) -> Outcome:
    result = reproduce_sophie_germain(config, _context(config))
    return result.to_json(), None, result.passed


def cmd_euler(args, config: RunConfig) -> Outcome:
    if args.accelerate:
        fast = twin_constant_accelerated(args.digits)
        direct = twin_constant_direct(config.cutoff, _context(config))
        result = {'twin_constant': fast.to_json(), 'direct': direct.to_json(),
                  'consistent': direct.contains(fast.lo.fraction_bounds()[0])
                  or direct.contains(fast.hi.fraction_bounds()[1])}
        return result, None, result['consistent']
    if not args.polys:
        raise InputError("euler needs a polynomial system unless --accelerate is given")
    system = _system(args)
    interval = singular_series(system, cutoff=config.cutoff, ctx=_context(config), regime=_regime(config),
                               workers=config.workers)
    return {'system': system.label, 'singular_series': interval.to_json()}, None, True


def cmd_count(args, config: RunConfig) -> Outcome:
    system = _system(args)
    if args.window is not None:
        result = count_window(system, args.n, args.window, prime_n=args.prime_n,
                              cross_check=args.cross_check, workers=config.workers)
    else:
        if args.prime_n:
            result = count_window(system, args.n, args.n, prime_n=True, cross_check=args.cross_check,
                                  workers=config.workers)
        else:
            result = count_pi_F(system, args.n, cross_check=args.cross_check, prediction=args.prediction,
                                workers=config.workers)
    row = result.to_json()
    return row, [row], True


def cmd_sg_count(args, config: RunConfig) -> Outcome:
    count = sophie_germain_count(args.n, args.method, workers=config.workers)
    row: Dict[str, Any] = {'N': args.n, 'count': count, 'method': args.method}
    passed = True
    if args.cross_check:
        other = 'simple' if args.method == 'segmented' else 'segmented'
        row['cross_check'] = sophie_germain_count(args.n, other, workers=config.workers)
        passed = row['cross_check'] == count
        if not passed:
            logger.error("Sophie Germain counts disagree: %d (%s) vs %d (%s)",
                         count, args.method, row['cross_check'], other)
    return row, [row], passed


def _suite_selberg(args, config: RunConfig) -> Outcome:
    checks = [selberg_inequality_check(i) for i in random_instances(args.count, args.seed)]
    rows = [c.to_json() for c in checks]
    failures = [r for r in rows if not r['passed']]
    return {'suite': 'selberg', 'checked': len(rows), 'failures': failures}, \
        [{**r['instance'], **{k: v for k, v in r.items() if k != 'instance'}} for r in rows], not failures


def _suite_lemmas(args, config: RunConfig) -> Outcome:
    ctx = _context(config)
    system = _system(args) if args.polys else PolySystem.parse(['k^2 + 3'])
    params = SieveParams.for_system(system, _regime(config), ctx)
    report = lemma_envelope_checks(system, params)
    return report.to_json(), [r.to_json() for r in report.records], report.passed


def _suite_rho(args, config: RunConfig) -> Outcome:
    report = rho_identity_checks(seed=args.seed)
    return report.to_json(), None, report.passed


def _suite_remainder(args, config: RunConfig) -> Outcome:
    rows = []
    for instance in random_instances(args.count, args.seed, max_y=10 ** 4, max_z=30):
        for record in remainder_records(instance):
            rows.append({**instance.to_json(), **record.to_json()})
    failures = [r for r in rows if not r['within']]
    return {'suite': 'remainder', 'checked': len(rows), 'failures': failures[:50]}, rows, not failures


def cmd_check(args, config: RunConfig) -> Outcome:
    suite = {
        'selberg': _suite_selberg,
        'lemmas': _suite_lemmas,
        'rho': _suite_rho,
        'remainder': _suite_remainder,
    }[args.suite]
    result, rows, passed = suite(args, config)
    result = {**result, 'passed': passed,
              'note': 'the final bound is not testable by enumeration at its threshold'}
    return result, rows, passed


COMMANDS = {
    'analyze': cmd_analyze,
    'rho-table': cmd_rho_table,
    'qf': cmd_qf,
    'lf': cmd_lf,
    'find-x': cmd_find_x,
    'tau': cmd_tau,
    'table1': cmd_table1,
    'sophie-germain': cmd_sophie_germain,
    'euler': cmd_euler,
    'count': cmd_count,
    'sg-count': cmd_sg_count,
    'check': cmd_check,
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None, help="Working precision in decimal digits.")
    common.add_argument("--rounding", choices=("up", "down", "nearest"), default=None,
                        help="Direction used when printing decimal read-outs.")
    common.add_argument("--grh", action="store_true", help="Use the constants conditional on GRH.")
    common.add_argument("--lambda", dest="lam", default=None, help="Override lambda (default 2 kappa).")
    common.add_argument("--k0", type=int, default=None, help="Terms kept in the m0 series.")
    common.add_argument("--grid-step", default=None, help="Step of b0 in X = exp(b0 10^b1): 0.1 or 0.01.")
    common.add_argument("--b1-max", type=int, default=None, help="Largest decade b1 scanned.")
    common.add_argument("--cutoff", type=int, default=None, help="Primes multiplied out in Euler products.")
    common.add_argument("--workers", type=int, default=None, help="Worker threads.")
    fmt = common.add_mutually_exclusive_group()
    for name in OUTPUT_FORMATS:
        fmt.add_argument(f"--{name}", dest="output_format", action="store_const", const=name,
                         help=f"Write the report as {name}.")
    common.add_argument("--out", "-o", default=None, help="Write the report to this file instead of stdout.")
    common.add_argument("--config", default=None, help="key = value file merged under the flags.")
    common.add_argument("--log-level", default=LOG_LEVEL, help="Logging level.")
    return common


def parse_args(argv: Iterable[str] | None = None) -> argparse.Namespace:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        description="Explicit Selberg sieve bounds for polynomial prime counts.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, polys: str = 'required') -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if polys == 'required':
            p.add_argument("polys", nargs="+", help="Polynomials of the system, e.g. 'k^2 + 3'.")
        elif polys == 'optional':
            p.add_argument("polys", nargs="*", help="Polynomials of the system.")
        return p

    add("analyze", "Discriminant, irreducibility and Nagell-type constants of a system.")
    p = add("rho-table", "rho_F(p) for every prime up to a limit.")
    p.add_argument("--limit", type=int, default=100)
    for name, help_text in (("qf", "Q_F per factor."), ("lf", "Admissible L_F of a system.")):
        p = add(name, help_text)
        p.add_argument("--variant", choices=[v.value for v in QfVariant], default=QfVariant.PRINTED.value)
        if name == "lf":
            p.add_argument("--w", type=int, default=None, help="Lower end of an empirical check.")
            p.add_argument("--z", type=int, default=None, help="Upper end of an empirical check.")
    for name, help_text in (("find-x", "Minimal admissible X on the grid."),
                            ("tau", "Final bound constants at the minimal or a given X.")):
        p = add(name, help_text)
        p.add_argument("--shifted", action="store_true", help="Count prime arguments (system k F).")
        p.add_argument("--variant", choices=[v.value for v in QfVariant], default=QfVariant.PRINTED.value)
        if name == "tau":
            p.add_argument("--log-x", default=None, help="Use this natural log X instead of the grid minimum.")
            p.add_argument("--c1", choices=C1_VARIANTS, default="printed")
    p = add("table1", "Reproduce the four published single-polynomial cases.", polys='none')
    p.add_argument("--sensitivity", action="store_true", help="Add unconditional rows without C_F(d).")
    p.add_argument("--case", dest="cases", type=int, action="append", choices=(0, 1, 2, 3))
    p.add_argument("--regime", dest="regimes", action="append", choices=[r.value for r in Regime])
    add("sophie-germain", "Reproduce the Sophie Germain bound.", polys='none')
    p = add("euler", "Enclose a singular series, or the twin-prime constant.", polys='optional')
    p.add_argument("--accelerate", action="store_true", help="Twin-prime constant through prime zeta values.")
    p.add_argument("--digits", type=int, default=20, help="Digits for --accelerate.")
    p.add_argument("--shifted", action="store_true")
    p = add("count", "Count n with every F_i(n) prime.")
    p.add_argument("--n", type=int, required=True, help="Upper end x of the window.")
    p.add_argument("--window", type=int, default=None, help="Window length y (default: all of 1..n).")
    p.add_argument("--prime-n", action="store_true", help="Only prime n.")
    p.add_argument("--cross-check", action="store_true", help="Require agreement of both methods.")
    p.add_argument("--prediction", action="store_true", help="Add the Bateman-Horn estimate.")
    p = add("sg-count", "Count Sophie Germain primes up to N.", polys='none')
    p.add_argument("n", type=int)
    p.add_argument("--method", choices=("segmented", "simple"), default="segmented")
    p.add_argument("--cross-check", action="store_true")
    p = add("check", "Run a verification suite.", polys='optional')
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--count", type=int, default=200, help="Random instances.")
    p.add_argument("--seed", type=int, default=0)
    return parser.parse_args(argv)


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        'digits': args.precision,
        'rounding': args.rounding,
        'regime': 'grh' if args.grh else None,
        'lam': args.lam,
        'k0': args.k0,
        'grid_step': args.grid_step,
        'b1_max': args.b1_max,
        'cutoff': args.cutoff,
        'workers': args.workers,
        'output_format': args.output_format,
    }
    return load_run_config(Path(args.config) if args.config else None, overrides)


def run(args: argparse.Namespace) -> int:
    config = _config(args)
    result, rows, passed = COMMANDS[args.command](args, config)
    payload = envelope(args.command, config, result)
    text = render(payload, config.output_format, rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return 0 if passed else 2


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s | %(message)s")
    try:
        return run(args)
    except SieveError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
