from fractions import Fraction
from math import comb, lcm
from typing import Any, Iterable, List, Sequence, Tuple

from .error_utils import ParseError

Rational = Fraction


def parse_rational(value: Any) -> Fraction:
    """
    Parse a rational from a "p/q" string, an integer string, an int or a Fraction

    Floats are rejected: a binary float silently carries rounding error into
    quantities that must be exact.

    Args:
        value: Raw value from JSON, the command line or Python code

    Returns:
        Fraction: Exact value in lowest terms
    """
    if isinstance(value, bool):
        raise ParseError(f"Boolean is not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ParseError("Empty string is not a rational")
        if any(ch in text for ch in ".eE"):
            raise ParseError(f"Decimal notation is not accepted, use p/q: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"Cannot parse rational {value!r}: {str(e)}") from e
    raise ParseError(f"Unsupported rational value {value!r} of type {type(value).__name__}")


def parse_rational_list(values: Iterable[Any]) -> Tuple[Fraction, ...]:
    return tuple(parse_rational(v) for v in values)


def format_rational(value: Fraction) -> str:
    """Render as "p/q", or "p" when the denominator is 1"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_rational_list(values: Iterable[Fraction]) -> List[str]:
    return [format_rational(v) for v in values]


def common_denominator(values: Iterable[Fraction]) -> int:
    """Least common multiple of the denominators (1 for an empty input)"""
    result = 1
    for v in values:
        result = lcm(result, Fraction(v).denominator)
    return result


def scale_to_integers(values: Sequence[Fraction]) -> Tuple[List[int], int]:
    """
    Multiply by the LCM of the denominators

    Returns:
        tuple: (integer values, scale factor)
    """
    scale = common_denominator(values)
    return [int(Fraction(v) * scale) for v in values], scale


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n"""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)
