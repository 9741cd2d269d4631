"""
SV-Inverse at desk scale: exact and nearest search over an enumerated class
of integer-weight games, an iterative Banzhaf heuristic, the uniqueness
check for games with equal semivalues, and verification through an inverse
oracle.

A ``no_solution_in_class`` answer only covers the enumerated class; weights
outside [0, bound] are never examined.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from ..utils.error_utils import (
    InstanceTooLarge,
    PreconditionViolated,
    ZeroSemivalueEncountered,
    handle_operation_error,
    require_cap,
    require_dimension,
)
from ..utils.logging_utils import get_logger
from ..utils.rational_utils import format_rational_list, parse_rational, parse_rational_list
from .game_model import ProbabilityVector, WeightedGame, normalized_game, preset_probability_vector, truth_table
from .semivalue_service import SemivalueService, semivalues_from_table

logger = get_logger(__name__)

NORMS = ('l1', 'l2')
STATUSES = ('found', 'no_solution_in_class', 'nearest')


@dataclass(frozen=True)
class InverseInstance:
    targets: Tuple[Fraction, ...]
    theta: Fraction
    pvec: ProbabilityVector

    def __post_init__(self) -> None:
        require_dimension(self.pvec.n, len(self.targets), "targets")

    @property
    def n(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class InverseResult:
    status: str
    weights: Optional[Tuple[Fraction, ...]]
    theta: Fraction
    distance: Optional[Fraction] = None
    games_examined: int = 0
    iterations: Optional[int] = None

    @property
    def game(self) -> Optional[WeightedGame]:
        if self.weights is None:
            return None
        return WeightedGame(self.weights, self.theta)


@dataclass
class UniquenessReport:
    hypothesis_met: bool
    message: str
    points_checked: int = 0
    disagreements: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


@dataclass(frozen=True)
class EqualSemivalueCheck:
    """Outcome of the exhaustive search for games with equal semivalues but different functions"""

    games: int
    groups: int
    counterexamples: int


def distance(values: Sequence[Fraction], targets: Sequence[Fraction], norm: str) -> Fraction:
    """l1 distance, or the squared l2 distance"""
    if norm == 'l1':
        return sum((abs(a - b) for a, b in zip(values, targets)), Fraction(0))
    if norm == 'l2':
        return sum(((a - b) ** 2 for a, b in zip(values, targets)), Fraction(0))
    raise PreconditionViolated(f"Unknown norm {norm!r}", {"known": list(NORMS)})


def _signs(weights: Sequence[Fraction], theta: Fraction, bits: Sequence[int]) -> Fraction:
    return sum((w * b for w, b in zip(weights, bits)), Fraction(0)) - theta


class InverseService:
    """Solvers for the inverse semivalue problem"""

    def __init__(self, semivalue_service: SemivalueService, cap: int = 20, bound: int = 2,
                 max_players: int = 8):
        self.semivalues = semivalue_service
        self.metrics = semivalue_service.metrics
        self.cap = cap
        self.bound = bound
        self.max_players = max_players

    @classmethod
    def from_config(cls, config, semivalue_service: SemivalueService) -> "InverseService":
        return cls(semivalue_service, cap=config.cap, bound=config.inverse_bound,
                   max_players=config.inverse_max_players)

    def _check_size(self, n: int, bound: int) -> None:
        if bound < 1:
            raise PreconditionViolated("bound must be at least 1", {"bound": bound})
        if n > self.max_players:
            raise InstanceTooLarge(
                f"Enumeration is limited to n <= {self.max_players}",
                {"n": n, "limit": self.max_players},
            )

    @handle_operation_error
    def enumerate_canonical_games(self, n: int, bound: Optional[int] = None) -> List[WeightedGame]:
        """
        One representative per Boolean function among games with integer
        weights in [0, bound] and integer thresholds in [-n*bound, n*bound]

        Candidates are visited in lexicographic order of (weights, theta), so
        each class keeps its lexicographically smallest member.

        This is the standalone census of the class. The inverse solvers do
        not scan it: they keep the instance threshold fixed and vary only the
        normalized weights (see ``_candidates``).
        """
        bound = self.bound if bound is None else bound
        self._check_size(n, bound)
        seen = set()
        games = []
        for weights in product(range(bound + 1), repeat=n):
            for theta in range(-n * bound, n * bound + 1):
                game = WeightedGame(tuple(Fraction(w) for w in weights), Fraction(theta))
                table = truth_table(game)
                if table not in seen:
                    seen.add(table)
                    games.append(game)
        logger.logjson("DEBUG", "Canonical games enumerated", {"n": n, "bound": bound, "classes": len(games)})
        return games

    def _candidates(self, inst: InverseInstance, bound: int) -> Iterator[Tuple[WeightedGame, Tuple[Fraction, ...]]]:
        """
        Normalized candidates (w / sum w, theta) with their semivalues

        Thresholds stay fixed at the instance value, so only the weight
        vector varies; duplicates by truth table are skipped.
        """
        seen = set()
        for weights in product(range(bound + 1), repeat=inst.n):
            game = normalized_game(weights, inst.theta)
            if game is None:
                continue
            table = truth_table(game)
            if table in seen:
                continue
            seen.add(table)
            yield game, semivalues_from_table(table, inst.n, inst.pvec).values

    @handle_operation_error
    def inverse_exact(self, inst: InverseInstance, bound: Optional[int] = None) -> InverseResult:
        bound = self.bound if bound is None else bound
        self._check_size(inst.n, bound)
        examined = 0
        with self.metrics.timer("inverse_exact"):
            for game, values in self._candidates(inst, bound):
                examined += 1
                if values == inst.targets:
                    self.metrics.increment_metric("games_examined", examined)
                    return InverseResult(status='found', weights=game.weights, theta=inst.theta,
                                         distance=Fraction(0), games_examined=examined)
        self.metrics.increment_metric("games_examined", examined)
        logger.logjson("INFO", "No game in the enumerated class matches", {
            "n": inst.n, "bound": bound, "games_examined": examined,
        })
        return InverseResult(status='no_solution_in_class', weights=None, theta=inst.theta,
                             games_examined=examined)

    @handle_operation_error
    def inverse_nearest(self, inst: InverseInstance, bound: Optional[int] = None,
                        norm: str = 'l1') -> InverseResult:
        bound = self.bound if bound is None else bound
        self._check_size(inst.n, bound)
        if norm not in NORMS:
            raise PreconditionViolated(f"Unknown norm {norm!r}", {"known": list(NORMS)})

        best: Optional[WeightedGame] = None
        best_distance: Optional[Fraction] = None
        examined = 0
        with self.metrics.timer("inverse_nearest"):
            for game, values in self._candidates(inst, bound):
                examined += 1
                d = distance(values, inst.targets, norm)
                # strict improvement keeps the lexicographically first minimizer
                if best_distance is None or d < best_distance:
                    best, best_distance = game, d
        self.metrics.increment_metric("games_examined", examined)
        return InverseResult(status='nearest', weights=best.weights, theta=inst.theta,
                             distance=best_distance, games_examined=examined)

    @handle_operation_error
    def iterative_banzhaf_heuristic(self, targets: Sequence, iterations: int = 10, step=1,
                                    theta=0) -> InverseResult:
        """
        Multiplicative weight updates toward Banzhaf targets

        Each weight is multiplied by 1 + step * (target_i / value_i - 1)
        clamped to [1/2, 2], then the weights are renormalized. The best
        iterate by squared l2 distance is returned; convergence is not
        guaranteed.
        """
        targets = parse_rational_list(targets)
        step = parse_rational(step)
        theta = parse_rational(theta)
        n = len(targets)
        if any(t < 0 for t in targets):
            raise PreconditionViolated("Heuristic targets must be nonnegative",
                                       {"targets": format_rational_list(targets)})
        if iterations < 0 or step <= 0:
            raise PreconditionViolated("iterations must be nonnegative and step positive")
        p = preset_probability_vector('banzhaf', n)
        low, high = Fraction(1, 2), Fraction(2)

        weights = tuple(Fraction(1, n) for _ in range(n))
        best_weights, best_distance = weights, None
        stuck = [t > 0 for t in targets]
        performed = 0
        for iteration in range(iterations + 1):
            values = self.semivalues.semivalues(WeightedGame(weights, theta), p).values
            d = distance(values, targets, 'l2')
            stuck = [s and v == 0 for s, v in zip(stuck, values)]
            if best_distance is None or d < best_distance:
                best_weights, best_distance = weights, d
            performed = iteration
            if d == 0 or iteration == iterations:
                break

            factors = []
            for target, value in zip(targets, values):
                if value == 0:
                    factors.append(high if target > 0 else low)
                else:
                    factor = 1 + step * (target / value - 1)
                    factors.append(min(high, max(low, factor)))
            scaled = [w * f for w, f in zip(weights, factors)]
            total = sum(scaled, Fraction(0))
            weights = tuple(w / total for w in scaled)

        if best_distance != 0 and any(stuck):
            raise ZeroSemivalueEncountered(
                "A player with a positive target kept a zero semivalue in every iterate",
                {"players": [i for i, s in enumerate(stuck) if s]},
            )
        self.metrics.increment_metric("games_examined", performed + 1)
        return InverseResult(
            status='found' if best_distance == 0 else 'nearest',
            weights=best_weights,
            theta=theta,
            distance=best_distance,
            games_examined=performed + 1,
            iterations=performed,
        )

    @handle_operation_error
    def uniqueness_check(self, f: WeightedGame, g: WeightedGame, p: ProbabilityVector) -> UniquenessReport:
        """
        Games with equal weight sums, equal thresholds and equal semivalues
        must agree wherever mu' is positive and the point does not lie on
        both hyperplanes
        """
        require_dimension(f.n, g.n, "second game")
        require_dimension(f.n, p.n, "probability vector")
        require_cap(f.n, self.cap, "uniqueness_check")
        if f.total_weight != g.total_weight:
            raise PreconditionViolated("Weight sums differ", {
                "f": format_rational_list([f.total_weight]), "g": format_rational_list([g.total_weight]),
            })
        if f.theta != g.theta:
            raise PreconditionViolated("Thresholds differ")

        table_f, table_g = truth_table(f), truth_table(g)
        if semivalues_from_table(table_f, f.n, p) != semivalues_from_table(table_g, g.n, p):
            return UniquenessReport(hypothesis_met=False, message="hypothesis not met")

        report = UniquenessReport(hypothesis_met=True, message="checked")
        for idx, bits in enumerate(product((-1, 1), repeat=f.n)):
            wt = bin(idx).count("1")
            if p.mu_prime_by_weight(wt) == 0:
                continue
            margin = abs(_signs(f.weights, f.theta, bits)) + abs(_signs(g.weights, g.theta, bits))
            if margin == 0:
                continue
            report.points_checked += 1
            if table_f[idx] != table_g[idx]:
                report.disagreements.append(bits)
        if report.disagreements:
            logger.logjson("ERROR", "Games with equal semivalues disagree", {
                "points": [list(b) for b in report.disagreements],
            })
        return report

    @handle_operation_error
    def equal_semivalue_search(self, n: int, bound: int, p: ProbabilityVector) -> EqualSemivalueCheck:
        """
        Exhaustive uniqueness check over every (weights, theta) with integer
        weights in [0, bound] and integer theta in [-n*bound, n*bound]

        Games are grouped by (weight sum, theta, semivalues); inside a group
        every truth table must match the first one on all points with
        positive mu'.
        """
        self._check_size(n, bound)
        require_dimension(n, p.n, "probability vector")
        support = [idx for idx in range(2 ** n) if p.mu_prime_by_weight(bin(idx).count("1")) > 0]
        groups: Dict[Tuple, Tuple[int, ...]] = {}
        games = 0
        counterexamples = 0
        for weights in product(range(bound + 1), repeat=n):
            for theta in range(-n * bound, n * bound + 1):
                table = truth_table(WeightedGame(tuple(Fraction(w) for w in weights), Fraction(theta)))
                games += 1
                key = (sum(weights), theta, semivalues_from_table(table, n, p).values)
                restricted = tuple(table[idx] for idx in support)
                first = groups.setdefault(key, restricted)
                if first != restricted:
                    counterexamples += 1
        self.metrics.increment_metric("games_examined", games)
        return EqualSemivalueCheck(games=games, groups=len(groups), counterexamples=counterexamples)

    @handle_operation_error
    def verification_via_inverse(self, weights: Sequence, theta, targets: Sequence, p: ProbabilityVector,
                                 inverse: Optional[Callable[[InverseInstance], InverseResult]] = None) -> bool:
        """
        Decide verification with an inverse oracle and a disagreement search

        The instance is (a, theta, c); the oracle gets (c, theta / sum a). A NO
        answer means false; otherwise the answer is true iff the returned
        game and (a / sum a, theta / sum a) agree wherever mu' is positive.
        """
        weights = parse_rational_list(weights)
        theta = parse_rational(theta)
        targets = parse_rational_list(targets)
        require_dimension(len(weights), len(targets), "targets")
        require_dimension(len(weights), p.n, "probability vector")
        require_cap(len(weights), self.cap, "verification_via_inverse")
        if any(w < 0 for w in weights) or sum(weights, Fraction(0)) == 0:
            raise PreconditionViolated("Verification needs nonnegative weights with a positive sum",
                                       {"weights": format_rational_list(weights)})

        original = normalized_game(weights, Fraction(0))
        scaled_theta = theta / sum(weights, Fraction(0))
        instance = InverseInstance(targets=targets, theta=scaled_theta, pvec=p)
        result = (inverse or self.inverse_exact)(instance)
        if result.status != 'found':
            return False

        a = WeightedGame(original.weights, scaled_theta)
        table_a, table_w = truth_table(a), truth_table(result.game)
        n = len(weights)
        return all(
            table_a[idx] == table_w[idx]
            for idx in range(2 ** n)
            if p.mu_prime_by_weight(bin(idx).count("1")) > 0
        )
