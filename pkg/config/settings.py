"""
Configuration settings for explicit-sieve.
"""
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv import dotenv_values, load_dotenv

from utils.errors import InputError

# Load environment variables
load_dotenv()

# Project root
PROJECT_ROOT = Path(__file__).resolve().parent.parent

VERSION = '0.4.0'

# Numeric configuration
PRECISION = int(os.getenv('EXPLICIT_SIEVE_PRECISION', 40))
ROUNDING = os.getenv('EXPLICIT_SIEVE_ROUNDING', 'up')
MIN_PRECISION = 15

# Sieve constant configuration
K0 = int(os.getenv('EXPLICIT_SIEVE_K0', 10))
GRID_STEP = float(os.getenv('EXPLICIT_SIEVE_GRID_STEP', 0.1))
B1_MIN = 1
B1_MAX = int(os.getenv('EXPLICIT_SIEVE_B1_MAX', 400))
LADDER_POINTS = 10
LADDER_RATIO = '1.5'

# Prime and residue configuration
EULER_CUTOFF = int(os.getenv('EXPLICIT_SIEVE_CUTOFF', 10 ** 6))
RHO_CROSSOVER = int(os.getenv('EXPLICIT_SIEVE_RHO_CROSSOVER', 10 ** 4))
PRIME_BUDGET = int(os.getenv('EXPLICIT_SIEVE_PRIME_BUDGET', 200))
SEGMENT_SIZE = int(os.getenv('EXPLICIT_SIEVE_SEGMENT', 2 ** 20))
EXACT_SUM_LIMIT = 10 ** 5
MERTENS_LIMIT = 10 ** 10

# Oracle limits
SIFT_MAX_Y = 10 ** 7
SIFT_MAX_Z = 10 ** 3
COUNT_MAX_N = 10 ** 9
SG_MAX_N = 10 ** 10
ROOT_SIEVE_LIMIT = 10 ** 7
REMAINDER_MAX_D = 10 ** 5
DIRECT_COUNT_BUDGET = 10 ** 8

# Parallelism and logging
WORKERS = int(os.getenv('EXPLICIT_SIEVE_WORKERS', 4))
LOG_LEVEL = os.getenv('EXPLICIT_SIEVE_LOG_LEVEL', 'INFO')

REGIMES = ('unconditional', 'grh')
GRID_STEPS = ('0.1', '0.01')
OUTPUT_FORMATS = ('json', 'csv', 'text')

# Keys accepted in a --config file, mapped to RunConfig fields
_CONFIG_KEYS = {
    'precision': 'digits',
    'digits': 'digits',
    'rounding': 'rounding',
    'lambda': 'lam',
    'lam': 'lam',
    'k0': 'k0',
    'grid_step': 'grid_step',
    'b1_max': 'b1_max',
    'regime': 'regime',
    'cutoff': 'cutoff',
    'format': 'output_format',
    'output_format': 'output_format',
    'workers': 'workers',
}


@dataclass(frozen=True)
class RunConfig:
    """Per-run settings shared by every command."""

    digits: int = PRECISION
    rounding: str = ROUNDING
    lam: Optional[str] = None
    k0: int = K0
    grid_step: str = str(GRID_STEP)
    b1_max: int = B1_MAX
    regime: str = 'unconditional'
    cutoff: int = EULER_CUTOFF
    output_format: str = 'json'
    workers: int = WORKERS

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    try:
        if name in ('digits', 'k0', 'b1_max', 'cutoff', 'workers'):
            return int(value)
        if name == 'grid_step':
            return str(float(value))
        if name == 'lam':
            return str(value).strip()
        return str(value).strip().lower()
    except (TypeError, ValueError) as exc:
        raise InputError(f"Invalid value for {name}: {value!r}") from exc


def validate_run_config(config: RunConfig) -> RunConfig:
    """Reject settings outside the supported ranges."""
    if config.digits < MIN_PRECISION:
        raise InputError(f"precision must be at least {MIN_PRECISION} digits, got {config.digits}")
    if config.grid_step not in GRID_STEPS:
        raise InputError(f"grid step must be one of {', '.join(GRID_STEPS)}, got {config.grid_step}")
    if config.regime not in REGIMES:
        raise InputError(f"regime must be one of {', '.join(REGIMES)}, got {config.regime}")
    if config.rounding not in ('up', 'down', 'nearest'):
        raise InputError(f"rounding must be up, down or nearest, got {config.rounding}")
    if config.k0 < 2:
        raise InputError(f"k0 must be at least 2, got {config.k0}")
    if config.output_format not in OUTPUT_FORMATS:
        raise InputError(f"output format must be one of {', '.join(OUTPUT_FORMATS)}")
    if config.cutoff < 100:
        raise InputError(f"Euler cutoff must be at least 100, got {config.cutoff}")
    if config.workers < 1:
        raise InputError("workers must be positive")
    return config


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Build the run configuration.

    Precedence, lowest first: built-in defaults, environment (.env), the
    key = value file at ``path``, then ``overrides`` from the command line.

    Args:
        path: Optional config file with key = value lines
        overrides: Values set explicitly on the command line (None entries are ignored)

    Returns:
        Validated RunConfig
    """
    values: Dict[str, Any] = {}

    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise InputError(f"Config file does not exist: {path}")
        for key, value in dotenv_values(path).items():
            field_name = _CONFIG_KEYS.get(key.strip().lower().replace('-', '_'))
            if field_name is None:
                raise InputError(f"Unknown config key in {path}: {key}")
            values[field_name] = _coerce(field_name, value)

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)

    return validate_run_config(replace(RunConfig(), **values))
