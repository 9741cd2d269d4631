from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from ..utils.error_utils import (
    NonIntegerWeights,
    PreconditionViolated,
    WeightRangeOverflow,
    handle_operation_error,
    require_cap,
    require_dimension,
)
from ..utils.logging_utils import get_logger
from ..utils.rational_utils import format_rational_list, parse_rational_list
from .game_model import ProbabilityVector, WeightedGame, truth_table
from .metrics_service import MetricsService

logger = get_logger(__name__)

METHODS = ('brute', 'dp', 'auto')


@dataclass(frozen=True)
class SemivalueVector:
    values: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]


@dataclass(frozen=True)
class ReformulationTerms:
    """hat_i = sum_x mu'(x) f(x) x_i and cf = sum_x f(x) (p_{wt-1} - p_wt)"""

    hat: Tuple[Fraction, ...]
    cf: Fraction

    def semivalues(self) -> Tuple[Fraction, ...]:
        return tuple((h + self.cf) / 2 for h in self.hat)


def semivalues_from_table(table: Sequence[int], n: int, p: ProbabilityVector) -> SemivalueVector:
    """
    Semivalue sums over a truth table in canonical order

    For each player the signed values f(x) x_i are first accumulated per
    p-index as integers; the rational weights p_t are applied once at the end.
    """
    counts = [[0] * n for _ in range(n)]
    for idx, value in enumerate(table):
        wt = bin(idx).count("1")
        for i in range(n):
            if idx >> (n - 1 - i) & 1:
                # x_i = +1 is weighted by p_{wt-1}
                counts[i][wt - 1] += value
            else:
                counts[i][wt] -= value
    return SemivalueVector(tuple(
        sum((p.p(t) * c for t, c in enumerate(row) if c), Fraction(0)) for row in counts
    ))


def _pivot_counts(weights: Tuple[int, ...], theta: int, player: int) -> Dict[int, int]:
    """
    Net pivot counts for one player, keyed by coalition size

    Counts subsets S of the other players through a table indexed by
    (|S|, w(S)). In the +-1 world w . x = 2 w(S) - W, so S wins exactly when
    2 w(S) - W - theta >= 0.
    """
    table: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for j, w in enumerate(weights):
        if j == player:
            continue
        grown: Dict[Tuple[int, int], int] = defaultdict(int)
        for (size, total), count in table.items():
            grown[(size, total)] += count
            grown[(size + 1, total + w)] += count
        table = grown

    total_weight = sum(weights)
    w_i = weights[player]
    net: Dict[int, int] = defaultdict(int)
    for (size, s), count in table.items():
        before = 1 if 2 * s - total_weight - theta >= 0 else -1
        after = 1 if 2 * (s + w_i) - total_weight - theta >= 0 else -1
        if after != before:
            net[size] += count * (after - before)
    return dict(net)


def _pivot_counts_job(args: Tuple[Tuple[int, ...], int, int]) -> Dict[int, int]:
    return _pivot_counts(*args)


class SemivalueService:
    """Exact semivalues of weighted games"""

    def __init__(self, cap: int = 20, dp_weight_limit: int = 1_000_000, jobs: int = 1,
                 metrics: Optional[MetricsService] = None):
        self.cap = cap
        self.dp_weight_limit = dp_weight_limit
        self.jobs = jobs
        self.metrics = metrics or MetricsService()

    @classmethod
    def from_config(cls, config, metrics: Optional[MetricsService] = None) -> "SemivalueService":
        return cls(cap=config.cap, dp_weight_limit=config.dp_weight_limit, jobs=config.jobs, metrics=metrics)

    def _check(self, g: WeightedGame, p: ProbabilityVector, operation: str) -> None:
        require_dimension(g.n, p.n, "probability vector")
        require_cap(g.n, self.cap, operation)

    @handle_operation_error
    def semivalues_bruteforce(self, g: WeightedGame, p: ProbabilityVector) -> SemivalueVector:
        self._check(g, p, "semivalues_bruteforce")
        with self.metrics.timer("semivalues_bruteforce"):
            table = truth_table(g)
            self.metrics.increment_metric("assignments_enumerated", len(table))
            return semivalues_from_table(table, g.n, p)

    @handle_operation_error
    def semivalues_pivot_dp(self, g: WeightedGame, p: ProbabilityVector,
                            rescale: bool = True) -> SemivalueVector:
        """
        Pseudo-polynomial semivalues from pivot counts

        Rational games are first scaled by the LCM of all denominators; the
        Boolean function, and hence the result, is unchanged. With
        ``rescale=False`` the game must already have integer weights and
        threshold.
        """
        require_dimension(g.n, p.n, "probability vector")
        weights, theta, scale = g.integer_form()
        if not rescale and scale != 1:
            raise NonIntegerWeights("The pivot DP needs integer weights and threshold",
                                    {"weights": format_rational_list(g.weights), "scale": scale})
        magnitude = sum(abs(w) for w in weights) + abs(theta)
        if magnitude > self.dp_weight_limit:
            raise WeightRangeOverflow(
                f"Total absolute weight {magnitude} exceeds the DP limit {self.dp_weight_limit}",
                {"magnitude": magnitude, "limit": self.dp_weight_limit, "scale": scale},
            )

        with self.metrics.timer("semivalues_pivot_dp"):
            jobs = [(tuple(weights), theta, i) for i in range(g.n)]
            if self.jobs > 1 and g.n > 1:
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    per_player = list(pool.map(_pivot_counts_job, jobs))
            else:
                per_player = [_pivot_counts_job(job) for job in jobs]

        logger.logjson("DEBUG", "Pivot DP finished", {"n": g.n, "scale": scale, "magnitude": magnitude})
        return SemivalueVector(tuple(
            sum((p.p(t) * c for t, c in counts.items()), Fraction(0)) for counts in per_player
        ))

    def semivalues(self, g: WeightedGame, p: ProbabilityVector, method: str = 'auto') -> SemivalueVector:
        if method == 'brute':
            return self.semivalues_bruteforce(g, p)
        if method == 'dp':
            return self.semivalues_pivot_dp(g, p)
        if method != 'auto':
            raise PreconditionViolated(f"Unknown method {method!r}", {"known": list(METHODS)})
        weights, theta, _ = g.integer_form()
        if sum(abs(w) for w in weights) + abs(theta) <= self.dp_weight_limit:
            return self.semivalues_pivot_dp(g, p)
        return self.semivalues_bruteforce(g, p)

    @handle_operation_error
    def reformulation_terms(self, g: WeightedGame, p: ProbabilityVector) -> ReformulationTerms:
        self._check(g, p, "reformulation_terms")
        n = g.n
        table = truth_table(g)
        # per weight class: sum f(x) x_i and sum f(x)
        signed = [[0] * (n + 1) for _ in range(n)]
        by_weight = [0] * (n + 1)
        for idx, value in enumerate(table):
            wt = bin(idx).count("1")
            by_weight[wt] += value
            for i in range(n):
                signed[i][wt] += value if idx >> (n - 1 - i) & 1 else -value

        hat = tuple(
            sum((p.mu_prime_by_weight(wt) * s for wt, s in enumerate(row)), Fraction(0)) for row in signed
        )
        cf = sum(((p.p(wt - 1) - p.p(wt)) * f for wt, f in enumerate(by_weight)), Fraction(0))
        return ReformulationTerms(hat=hat, cf=cf)

    @handle_operation_error
    def chow_parameters(self, g: WeightedGame) -> Tuple[Fraction, Tuple[Fraction, ...]]:
        """(E[f], (E[f x_1], ..., E[f x_n])) under the uniform distribution"""
        require_cap(g.n, self.cap, "chow_parameters")
        n = g.n
        table = truth_table(g)
        size = len(table)
        degree_one = [0] * n
        for idx, value in enumerate(table):
            for i in range(n):
                degree_one[i] += value if idx >> (n - 1 - i) & 1 else -value
        return Fraction(sum(table), size), tuple(Fraction(c, size) for c in degree_one)

    @handle_operation_error
    def verify_semivalues(self, g: WeightedGame, p: ProbabilityVector, targets: Sequence) -> bool:
        """Exact componentwise comparison of the game's semivalues with the targets"""
        targets = parse_rational_list(targets)
        require_dimension(g.n, len(targets), "targets")
        if not g.has_nonnegative_weights():
            raise PreconditionViolated("Verification is defined for nonnegative weights",
                                       {"weights": format_rational_list(g.weights)})
        values = self.semivalues_bruteforce(g, p)
        return tuple(values.values) == tuple(targets)

