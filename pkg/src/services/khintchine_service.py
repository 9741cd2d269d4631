from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Optional, Sequence, Tuple

from ..utils.error_utils import (
    NonIntegerWeights,
    PreconditionViolated,
    handle_operation_error,
    require_cap,
    require_dimension,
)
from ..utils.logging_utils import get_logger
from ..utils.rational_utils import parse_rational_list, scale_to_integers
from .game_model import ProbabilityVector, lambda_norm
from .metrics_service import MetricsService

logger = get_logger(__name__)

KHINTCHINE_METHODS = ('brute', 'dp')


@dataclass(frozen=True)
class KhintchineResult:
    """K_mu(a) = E_{x ~ mu_{p^n}} |a . x|"""

    value: Fraction
    method: str


def dot_count_table(vector: Sequence[int]) -> Dict[Tuple[int, int], int]:
    """
    Number of assignments per (wt(x), a . x)

    Built coordinate by coordinate from the state (count of +1s, partial dot
    product); one table serves both the Khintchine constant and the
    partition probability.
    """
    table: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for a in vector:
        grown: Dict[Tuple[int, int], int] = defaultdict(int)
        for (ones, total), count in table.items():
            grown[(ones, total - a)] += count
            grown[(ones + 1, total + a)] += count
        table = grown
    return dict(table)


def _dot_count_bruteforce(vector: Sequence[int]) -> Dict[Tuple[int, int], int]:
    table: Dict[Tuple[int, int], int] = defaultdict(int)
    for bits in product((-1, 1), repeat=len(vector)):
        ones = sum(1 for b in bits if b == 1)
        table[(ones, sum(a * b for a, b in zip(vector, bits)))] += 1
    return dict(table)


class KhintchineService:
    """Khintchine constants and partition probabilities under mu_{p^n}"""

    def __init__(self, cap: int = 20, metrics: Optional[MetricsService] = None):
        self.cap = cap
        self.metrics = metrics or MetricsService()

    @classmethod
    def from_config(cls, config, metrics: Optional[MetricsService] = None) -> "KhintchineService":
        return cls(cap=config.cap, metrics=metrics)

    def _counts(self, vector: Sequence[int], method: str, operation: str) -> Dict[Tuple[int, int], int]:
        if method == 'brute':
            require_cap(len(vector), self.cap, operation)
            self.metrics.increment_metric("assignments_enumerated", 2 ** len(vector))
            return _dot_count_bruteforce(vector)
        if method == 'dp':
            self.metrics.increment_metric("dp_tables_built")
            return dot_count_table(vector)
        raise PreconditionViolated(f"Unknown method {method!r}", {"known": list(KHINTCHINE_METHODS)})

    @handle_operation_error
    def khintchine(self, a: Sequence, p: ProbabilityVector, method: str = 'dp') -> KhintchineResult:
        """
        Exact K_mu(a)

        Rational vectors are scaled to integers c*a first; since
        |c a . x| = c |a . x| the result is divided by c afterwards.
        """
        a = parse_rational_list(a)
        require_dimension(p.n, len(a), "vector")
        integers, scale = scale_to_integers(a)
        with self.metrics.timer(f"khintchine_{method}"):
            counts = self._counts(integers, method, "khintchine")
            weighted = sum(
                (p.mu_prime_by_weight(ones) * count * abs(total) for (ones, total), count in counts.items() if total),
                Fraction(0),
            )
        value = weighted / lambda_norm(p) / scale
        logger.logjson("DEBUG", "Khintchine constant computed", {"n": p.n, "method": method, "scale": scale})
        return KhintchineResult(value=value, method=method)

    @handle_operation_error
    def partition_probability(self, w: Sequence, p: ProbabilityVector, method: str = 'dp') -> Fraction:
        """Pr_{x ~ mu_{p^n}}[w . x = 0] for an integer vector w"""
        w = parse_rational_list(w)
        require_dimension(p.n, len(w), "vector")
        if any(v.denominator != 1 for v in w):
            raise NonIntegerWeights("Partition probability is defined for integer vectors")
        counts = self._counts([int(v) for v in w], method, "partition_probability")
        zero_mass = sum(
            (p.mu_prime_by_weight(ones) * count for (ones, total), count in counts.items() if total == 0),
            Fraction(0),
        )
        return zero_mass / lambda_norm(p)

    def zero_mass_off_extremes(self, w: Sequence, p: ProbabilityVector) -> Fraction:
        """Pr[w . x = 0 and x is neither all -1 nor all +1]"""
        w = parse_rational_list(w)
        require_dimension(p.n, len(w), "vector")
        integers, _ = scale_to_integers(w)
        counts = dot_count_table(integers)
        n = len(integers)
        zero_mass = sum(
            (p.mu_prime_by_weight(ones) * count
             for (ones, total), count in counts.items() if total == 0 and 0 < ones < n),
            Fraction(0),
        )
        return zero_mass / lambda_norm(p)
