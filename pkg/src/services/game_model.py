"""
Exact game model: probability vectors, weighted games, assignments and the
induced distribution on {-1, 1}^n.

Assignments are enumerated in a fixed canonical order (lexicographic with
-1 < +1, first coordinate most significant). Index ``idx`` of that order has
bit ``n-1-i`` set exactly when coordinate ``i`` is +1, so ``wt(x)`` is the
popcount of the index. Truth tables produced here use the same order.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Iterator, List, Optional, Sequence, Tuple

from ..utils.error_utils import (
    DimensionMismatch,
    NegativeEntry,
    NormalizationViolated,
    ParseError,
    PreconditionViolated,
    UnknownPreset,
    handle_operation_error,
    require_dimension,
)
from ..utils.logging_utils import get_logger
from ..utils.rational_utils import binomial, format_rational, parse_rational, parse_rational_list, scale_to_integers

logger = get_logger(__name__)

PRESETS = ('banzhaf', 'shapley')


@dataclass(frozen=True)
class ProbabilityVector:
    """The vector p^n = (p_0, ..., p_{n-1}) defining a semivalue"""

    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise NormalizationViolated("A probability vector needs at least one entry")
        for t, value in enumerate(self.entries):
            if value < 0:
                raise NegativeEntry(f"p_{t} = {format_rational(value)} is negative", {"t": t})
        total = sum(binomial(self.n - 1, t) * value for t, value in enumerate(self.entries))
        if total != 1:
            raise NormalizationViolated(
                f"sum C(n-1,t) p_t = {format_rational(total)}, expected 1",
                {"n": self.n, "sum": format_rational(total)},
            )

    @property
    def n(self) -> int:
        return len(self.entries)

    def p(self, t: int) -> Fraction:
        """p_t with the convention p_{-1} = p_n = 0"""
        if 0 <= t < self.n:
            return self.entries[t]
        return Fraction(0)

    def mu_prime_by_weight(self, weight: int) -> Fraction:
        return self.p(weight) + self.p(weight - 1)

    def is_symmetric(self) -> bool:
        return all(self.entries[t] == self.entries[self.n - 1 - t] for t in range(self.n))


@dataclass(frozen=True)
class WeightedGame:
    """The LTF f(x) = sign(w . x - theta) with sign(0) = +1"""

    weights: Tuple[Fraction, ...]
    theta: Fraction

    def __post_init__(self) -> None:
        if len(self.weights) < 1:
            raise DimensionMismatch("A game needs at least one player")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def has_nonnegative_weights(self) -> bool:
        return all(w >= 0 for w in self.weights)

    def integer_form(self) -> Tuple[List[int], int, int]:
        """
        Scale weights and threshold by the LCM of all denominators

        Returns:
            tuple: (integer weights, integer threshold, scale factor)
        """
        scaled, scale = scale_to_integers(list(self.weights) + [self.theta])
        return scaled[:-1], scaled[-1], scale


@dataclass(frozen=True)
class Assignment:
    """A point x of {-1, 1}^n"""

    bits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (-1, 1) for b in self.bits):
            raise ParseError("Assignment coordinates must be -1 or +1", {"bits": list(self.bits)})

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def wt(self) -> int:
        return sum(1 for b in self.bits if b == 1)

    def flip(self, i: int) -> "Assignment":
        bits = list(self.bits)
        bits[i] = -bits[i]
        return Assignment(tuple(bits))

    @property
    def index(self) -> int:
        idx = 0
        for b in self.bits:
            idx = (idx << 1) | (1 if b == 1 else 0)
        return idx


@dataclass(frozen=True)
class InducedDistribution:
    """mu_{p^n}(x) = mu'(x) / Lambda with mu'(x) = p_{wt(x)} + p_{wt(x)-1}"""

    base: ProbabilityVector
    lambda_: Fraction

    def mu_prime(self, x: Assignment) -> Fraction:
        return mu_prime(self.base, x)

    def mu(self, x: Assignment) -> Fraction:
        return self.mu_prime(x) / self.lambda_

    def mu_by_weight(self, weight: int) -> Fraction:
        return self.base.mu_prime_by_weight(weight) / self.lambda_


@handle_operation_error
def make_probability_vector(entries: Sequence) -> ProbabilityVector:
    """Validate and build p^n from rationals or their string forms"""
    if len(entries) == 0:
        raise NormalizationViolated("A probability vector needs at least one entry")
    return ProbabilityVector(parse_rational_list(entries))


def preset_probability_vector(name: str, n: int) -> ProbabilityVector:
    """
    Build the Banzhaf or Shapley probability vector for n players

    Args:
        name: 'banzhaf' (p_t = 1/2^(n-1)) or 'shapley' (p_t = (n-t-1)! t! / n!)
        n: Number of players, at least 1

    Returns:
        ProbabilityVector: Exact preset vector
    """
    key = name.strip().lower()
    if n < 1:
        raise DimensionMismatch(f"Preset needs n >= 1, got {n}", {"n": n})
    if key == 'banzhaf':
        entries = tuple(Fraction(1, 2 ** (n - 1)) for _ in range(n))
    elif key == 'shapley':
        entries = tuple(Fraction(factorial(n - t - 1) * factorial(t), factorial(n)) for t in range(n))
    else:
        raise UnknownPreset(f"Unknown preset {name!r}", {"known": list(PRESETS)})
    return ProbabilityVector(entries)


def reasonable_window(n: int, alpha=Fraction(1, 4), beta=Fraction(1, 4)) -> List[int]:
    """Indices t < n with alpha*n <= t <= (1-beta)*n; empty for very small n"""
    alpha, beta = parse_rational(alpha), parse_rational(beta)
    if not (0 < alpha and 0 < beta and alpha + beta < 1):
        raise PreconditionViolated(
            "reasonable fractions need 0 < alpha, beta and alpha + beta < 1",
            {"alpha": format_rational(alpha), "beta": format_rational(beta)},
        )
    return [t for t in range(n) if alpha * n <= t <= (1 - beta) * n]


def random_probability_vector(n: int, rng: random.Random, reasonable: bool = True, max_mass: int = 9,
                              alpha=Fraction(1, 4), beta=Fraction(1, 4)) -> ProbabilityVector:
    """
    Draw a valid probability vector with small exact entries

    Masses m_t are integers in [0, max_mass]; the vector is m / sum C(n-1,t) m_t.
    With ``reasonable`` set, one coordinate inside the (alpha, beta) window is
    forced positive, preferring the middle one. When the window is empty the
    middle coordinate is used.
    """
    masses = [rng.randint(0, max_mass) for _ in range(n)]
    if reasonable or not any(masses):
        window = reasonable_window(n, alpha, beta) if reasonable else []
        t = n // 2 if not window or n // 2 in window else window[0]
        masses[t] = max(masses[t], 1)
    total = sum(binomial(n - 1, t) * m for t, m in enumerate(masses))
    return ProbabilityVector(tuple(Fraction(m, total) for m in masses))


def is_reasonable(p: ProbabilityVector, alpha=Fraction(1, 4), beta=Fraction(1, 4)) -> bool:
    """True iff some t with alpha*n <= t <= (1-beta)*n has p_t > 0"""
    return any(p.p(t) > 0 for t in reasonable_window(p.n, alpha, beta))


def eval_game(g: WeightedGame, x: Assignment) -> int:
    """sign(w . x - theta) with sign(0) = +1"""
    require_dimension(g.n, x.n, "assignment")
    value = sum((w * b for w, b in zip(g.weights, x.bits)), Fraction(0)) - g.theta
    return 1 if value >= 0 else -1


def mu_prime(p: ProbabilityVector, x: Assignment) -> Fraction:
    require_dimension(p.n, x.n, "assignment")
    return p.mu_prime_by_weight(x.wt)


def lambda_norm(p: ProbabilityVector) -> Fraction:
    """Lambda(p^n) = sum_t C(n,t) (p_t + p_{t-1})"""
    return sum((binomial(p.n, t) * p.mu_prime_by_weight(t) for t in range(p.n + 1)), Fraction(0))


def lambda_by_enumeration(p: ProbabilityVector) -> Fraction:
    return sum((mu_prime(p, Assignment(bits)) for bits in product((-1, 1), repeat=p.n)), Fraction(0))


def induced_distribution(p: ProbabilityVector) -> InducedDistribution:
    return InducedDistribution(base=p, lambda_=lambda_norm(p))


def all_assignments(n: int) -> Iterator[Tuple[int, ...]]:
    """Every point of {-1, 1}^n in canonical order"""
    return product((-1, 1), repeat=n)


def truth_table(g: WeightedGame) -> Tuple[int, ...]:
    """
    Values of the game on all 2^n assignments in canonical order

    Evaluation uses the integer form of the game, which is the same Boolean
    function since scaling by a positive constant preserves every sign.
    """
    weights, theta, _ = g.integer_form()
    table = []
    for bits in product((-1, 1), repeat=g.n):
        value = sum(w * b for w, b in zip(weights, bits)) - theta
        table.append(1 if value >= 0 else -1)
    return tuple(table)


def scale_game(g: WeightedGame, c: Fraction) -> WeightedGame:
    c = parse_rational(c)
    if c <= 0:
        raise PreconditionViolated("Scale factor must be positive", {"c": format_rational(c)})
    return WeightedGame(tuple(c * w for w in g.weights), c * g.theta)


def make_game(weights: Sequence, theta=0) -> WeightedGame:
    return WeightedGame(parse_rational_list(weights), parse_rational(theta))


def normalized_game(weights: Sequence[Fraction], theta: Fraction) -> Optional[WeightedGame]:
    """Weights divided by their sum, threshold kept as given; None for zero total"""
    total = sum(weights, Fraction(0))
    if total == 0:
        return None
    return WeightedGame(tuple(Fraction(w) / total for w in weights), Fraction(theta))
