"""
Error hierarchy for explicit-sieve.

Every error carries the process exit code the command line maps it to.
"""
from typing import Optional


class SieveError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InputError(SieveError, ValueError):
    """Invalid user input: malformed polynomial, bad configuration, zero polynomial."""

    exit_code = 4


class PolynomialSyntaxError(InputError):
    """Polynomial text that does not follow the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class PolynomialError(InputError):
    """Polynomial or system unusable by the sieve (reducible, fixed divisor, ...)."""


class DomainError(SieveError, ArithmeticError):
    """A formula evaluated outside its domain."""


class RangeError(DomainError):
    """A value left the representable range."""


class IndeterminateError(SieveError):
    """A sign or comparison cannot be decided at the working precision."""

    exit_code = 3


class RoundingModeError(SieveError):
    """Operands from incompatible numeric contexts were combined."""


class ConditionFailure(SieveError):
    """No admissible threshold satisfies the sieve conditions."""

    exit_code = 2

    def __init__(self, message: str, clause: Optional[str] = None):
        super().__init__(message)
        self.clause = clause


class OracleError(SieveError):
    """A brute-force oracle hit its limits or two implementations disagree."""

    exit_code = 2
