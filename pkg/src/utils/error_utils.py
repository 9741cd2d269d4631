from functools import wraps
from typing import Any, Callable, Dict, Optional

from ..utils.logging_utils import get_logger

logger = get_logger(__name__)


class SemivalueError(Exception):
    """Base class for every domain error raised by the library.

    Each subclass carries a stable ``code`` that the CLI prints inside its
    machine-readable error object.
    """

    code = "SemivalueError"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class NegativeEntry(SemivalueError):
    code = "NegativeEntry"


class NormalizationViolated(SemivalueError):
    code = "NormalizationViolated"


class UnknownPreset(SemivalueError):
    code = "UnknownPreset"


class DimensionMismatch(SemivalueError):
    code = "DimensionMismatch"


class InstanceTooLarge(SemivalueError):
    code = "InstanceTooLarge"


class NonIntegerWeights(SemivalueError):
    code = "NonIntegerWeights"


class WeightRangeOverflow(SemivalueError):
    code = "WeightRangeOverflow"


class OddTotalSum(SemivalueError):
    code = "OddTotalSum"


class BadShape(SemivalueError):
    code = "BadShape"


class BadY(SemivalueError):
    code = "BadY"


class DegenerateDenominator(SemivalueError):
    code = "DegenerateDenominator"


class ShapeViolation(SemivalueError):
    code = "ShapeViolation"


class ArityMismatch(SemivalueError):
    code = "ArityMismatch"


class ZeroSemivalueEncountered(SemivalueError):
    code = "ZeroSemivalueEncountered"


class PreconditionViolated(SemivalueError):
    code = "PreconditionViolated"


class ParseError(SemivalueError):
    code = "ParseError"


class UsageError(SemivalueError):
    code = "UsageError"


def require_dimension(expected: int, actual: int, what: str) -> None:
    """Raise DimensionMismatch unless ``actual == expected``"""
    if expected != actual:
        raise DimensionMismatch(
            f"{what} has length {actual}, expected {expected}",
            {"expected": expected, "actual": actual, "what": what},
        )


def require_cap(n: int, cap: int, operation: str) -> None:
    """Raise InstanceTooLarge when an enumeration over 2^n points exceeds the cap"""
    if n > cap:
        raise InstanceTooLarge(
            f"{operation} enumerates 2^{n} assignments, cap is n <= {cap}",
            {"n": n, "cap": cap, "operation": operation},
        )


def handle_operation_error(func: Callable) -> Callable:
    """
    Decorator for logging domain errors raised by a service operation

    Args:
        func: Function to decorate

    Returns:
        Callable: Decorated function
    """
    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        try:
            return func(*args, **kwargs)
        except SemivalueError as e:
            logger.logjson("WARNING", "Operation rejected its input", {
                "operation": func.__name__,
                "error": e.code,
                "message": e.message,
            })
            raise
        except (ZeroDivisionError, ValueError) as e:
            # Malformed numbers surface from Fraction() as one of these
            logger.logjson("ERROR", "Malformed numeric input", {
                "operation": func.__name__,
                "error": str(e),
            })
            raise ParseError(f"Malformed numeric input: {str(e)}", {"operation": func.__name__}) from e

    return wrapper
