"""Error codes and the exception type raised across wickcalc."""

from enum import Enum
from typing import Any


class ErrorCode(str, Enum):
    """Machine-readable failure categories."""

    INCONSISTENT_FACTORIZATION = "INCONSISTENT_FACTORIZATION"
    NON_QUANTIZED_LEVEL = "NON_QUANTIZED_LEVEL"
    NO_SOLUTION = "NO_SOLUTION"
    DIVISION_BY_ZERO_RECURRENCE = "DIVISION_BY_ZERO_RECURRENCE"
    NEGATIVE_WEIGHT = "NEGATIVE_WEIGHT"
    NO_POSITIVE_SOLUTION = "NO_POSITIVE_SOLUTION"
    DIVERGENT = "DIVERGENT"
    QUADRATURE_FAIL = "QUADRATURE_FAIL"
    TRUNCATION_UNSOUND = "TRUNCATION_UNSOUND"
    NOT_SCALAR = "NOT_SCALAR"
    ILL_CONDITIONED = "ILL_CONDITIONED"
    QUADRATURE_RESOLUTION = "QUADRATURE_RESOLUTION"
    FIT_UNSTABLE = "FIT_UNSTABLE"
    DEGREE_LIMIT = "DEGREE_LIMIT"
    ODE_DIVERGED = "ODE_DIVERGED"
    BRANCH = "BRANCH"
    NOT_CONSTANT = "NOT_CONSTANT"
    PRECISION_FLOOR = "PRECISION_FLOOR"
    CONFIG_INVALID = "CONFIG_INVALID"
    UNKNOWN_MODEL = "UNKNOWN_MODEL"
    CHECK_FAILED = "CHECK_FAILED"


class WickCalcError(RuntimeError):
    """Raised by library code; carries an :class:`ErrorCode` and optional details."""

    def __init__(self, code: ErrorCode, message: str, **details: Any) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    def __str__(self) -> str:
        return f"{self.code.value}: {self.message}"


# Exit codes used by the command-line runner.
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_INVALID = 2


def exit_code_for(error: WickCalcError) -> int:
    """Map an error to the process exit code."""
    if error.code in (ErrorCode.CONFIG_INVALID, ErrorCode.UNKNOWN_MODEL):
        return EXIT_CONFIG_INVALID
    return EXIT_CHECK_FAILED
