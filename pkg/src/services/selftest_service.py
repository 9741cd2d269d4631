"""
Runs every library invariant on small, deterministically drawn instances and
reports pass or fail per invariant. Failures are report entries, never
exceptions.
"""

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from ..utils.error_utils import DegenerateDenominator, PreconditionViolated, SemivalueError
from ..utils.logging_utils import get_logger
from .game_model import (
    Assignment,
    ProbabilityVector,
    WeightedGame,
    all_assignments,
    eval_game,
    induced_distribution,
    is_reasonable,
    lambda_by_enumeration,
    lambda_norm,
    make_game,
    make_probability_vector,
    preset_probability_vector,
    random_probability_vector,
    reasonable_window,
    scale_game,
    truth_table,
)
from .inverse_service import InverseInstance, InverseService
from .khintchine_service import KhintchineService
from .reduction_service import RPartitionInstance, ReductionService, special_form_vector

logger = get_logger(__name__)

Check = Callable[[random.Random], int]

# exhaustive function-level checks stop here
EXHAUSTIVE_N = 8


@dataclass
class InvariantResult:
    name: str
    passed: bool
    cases: int = 0
    detail: Optional[str] = None
    elapsed_ms: float = 0.0


@dataclass
class SelftestReport:
    results: List[InvariantResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


class SelftestService:
    """Desk-scale invariant suite"""

    def __init__(self, reductions: ReductionService, inverse: InverseService, seed: int = 20240101,
                 max_n: int = 6, rounds: int = 10, alpha=Fraction(1, 4), beta=Fraction(1, 4),
                 extra_checks: Sequence[Tuple[str, Check]] = ()):
        if max_n < 1 or rounds < 1:
            raise PreconditionViolated("selftest needs max_n >= 1 and rounds >= 1",
                                       {"max_n": max_n, "rounds": rounds})
        reasonable_window(max_n, alpha, beta)
        self.reductions = reductions
        self.semivalues = reductions.semivalues
        self.khintchine: KhintchineService = reductions.khintchine
        self.inverse = inverse
        self.seed = seed
        self.max_n = max_n
        self.rounds = rounds
        self.alpha = alpha
        self.beta = beta
        self.extra_checks = list(extra_checks)

    @classmethod
    def from_config(cls, config, reductions: ReductionService, inverse: InverseService, **kwargs) -> "SelftestService":
        kwargs.setdefault('seed', config.seed)
        return cls(reductions, inverse, alpha=config.reasonable_alpha, beta=config.reasonable_beta, **kwargs)

    def _random_p(self, rng: random.Random, n: int) -> ProbabilityVector:
        return random_probability_vector(n, rng, reasonable=True, alpha=self.alpha, beta=self.beta)

    def _random_game(self, rng: random.Random, n: int, low: int = -20, high: int = 20) -> WeightedGame:
        weights = [rng.randint(low, high) for _ in range(n)]
        return make_game(weights, rng.randint(low, high))

    def _random_scale(self, rng: random.Random) -> Fraction:
        return Fraction(rng.randint(1, 9), rng.randint(1, 9))

    def _pvecs(self, rng: random.Random, n: int) -> List[ProbabilityVector]:
        return [preset_probability_vector('banzhaf', n), preset_probability_vector('shapley', n),
                self._random_p(rng, n)]

    # each check returns the number of cases it exercised and raises AssertionError on failure

    def check_distribution(self, rng: random.Random) -> int:
        cases = 0
        for n in range(1, min(self.max_n, EXHAUSTIVE_N) + 1):
            for p in self._pvecs(rng, n):
                mu = induced_distribution(p)
                masses = [mu.mu(Assignment(bits)) for bits in all_assignments(n)]
                assert min(masses) >= 0, f"Negative mass at n={n}"
                assert sum(masses) == 1, f"Masses sum to {sum(masses)} at n={n}"
                cases += 1
        return cases

    def check_presets_valid(self, rng: random.Random) -> int:
        cases = 0
        for n in range(1, self.max_n + 1):
            for name in ('banzhaf', 'shapley'):
                preset = preset_probability_vector(name, n)
                assert make_probability_vector(preset.entries) == preset
                cases += 1
        return cases

    def check_reasonable_draws(self, rng: random.Random) -> int:
        cases = 0
        for n in range(1, self.max_n + 1):
            if not reasonable_window(n, self.alpha, self.beta):
                continue
            for _ in range(self.rounds):
                p = self._random_p(rng, n)
                assert is_reasonable(p, self.alpha, self.beta), f"Unreasonable draw {p.entries}"
                cases += 1
        return cases

    def check_eval_scaling(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, min(self.max_n, EXHAUSTIVE_N))
            g = make_game([Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(n)],
                          Fraction(rng.randint(-20, 20), rng.randint(1, 5)))
            scaled = scale_game(g, self._random_scale(rng))
            for bits in all_assignments(n):
                x = Assignment(bits)
                assert eval_game(scaled, x) == eval_game(g, x), f"Scaling changes {g} at {bits}"
            cases += 1
        return cases

    def check_lambda(self, rng: random.Random) -> int:
        cases = 0
        for n in range(1, self.max_n + 1):
            p = self._random_p(rng, n)
            assert lambda_norm(p) == lambda_by_enumeration(p), f"Lambda mismatch at n={n}"
            cases += 1
        banzhaf = preset_probability_vector('banzhaf', 3)
        assert lambda_norm(banzhaf) == 4 - Fraction(4, 8)
        return cases + 1

    def check_dp_matches_bruteforce(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g, p = self._random_game(rng, n), self._random_p(rng, n)
            brute = self.semivalues.semivalues_bruteforce(g, p)
            assert self.semivalues.semivalues_pivot_dp(g, p) == brute, f"DP differs on {g}"
            cases += 1
        return cases

    def check_reformulation(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g, p = self._random_game(rng, n), self._random_p(rng, n)
            terms = self.semivalues.reformulation_terms(g, p)
            assert terms.semivalues() == self.semivalues.semivalues_bruteforce(g, p).values
            cases += 1
        return cases

    def check_fixed_points(self, rng: random.Random) -> int:
        maj3 = make_game([1, 1, 1])
        assert self.semivalues.semivalues_bruteforce(maj3, preset_probability_vector('banzhaf', 3)).values \
            == (1, 1, 1)
        weighted = make_game([2, 1, 1], 2)
        assert self.semivalues.semivalues_bruteforce(weighted, preset_probability_vector('shapley', 3)).values \
            == (Fraction(4, 3), Fraction(1, 3), Fraction(1, 3))
        cases = 2
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            dictator = make_game([1] + [0] * (n - 1))
            values = self.semivalues.semivalues_bruteforce(dictator, self._random_p(rng, n)).values
            assert values == (2,) + (0,) * (n - 1), f"Dictator values {values}"
            cases += 1
        return cases

    def check_shapley_efficiency(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g = self._random_game(rng, n)
            table = truth_table(g)
            values = self.semivalues.semivalues_bruteforce(g, preset_probability_vector('shapley', n)).values
            assert sum(values) == table[-1] - table[0]
            cases += 1
        return cases

    def check_banzhaf_chow(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g = self._random_game(rng, n)
            _, degree_one = self.semivalues.chow_parameters(g)
            banzhaf = self.semivalues.semivalues_bruteforce(g, preset_probability_vector('banzhaf', n)).values
            assert banzhaf == tuple(2 * c for c in degree_one)
            cases += 1
        return cases

    def check_khintchine_methods(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            a = [rng.randint(-6, 6) for _ in range(n)]
            p = self._random_p(rng, n)
            assert self.khintchine.khintchine(a, p, "dp").value == self.khintchine.khintchine(a, p, "brute").value
            assert self.khintchine.partition_probability(a, p, 'dp') == \
                self.khintchine.partition_probability(a, p, 'brute')
            cases += 1
        return cases

    def check_rpartition_recovery(self, rng: random.Random) -> int:
        cases = 0
        attempts = 0
        while cases < self.rounds and attempts < 50 * self.rounds:
            attempts += 1
            n = rng.randint(2, max(2, self.max_n - 2))
            c = tuple(rng.randint(1, 6) for _ in range(n))
            ks = [k for k in range(1, n + 1) if self.reductions.promise_b1 * n <= k <= self.reductions.promise_b2 * n]
            if not ks:
                continue
            inst = RPartitionInstance(c=c, k=rng.choice(ks))
            report = self.reductions.check_rpartition_promise(inst)
            if not report.holds:
                continue
            p = rng.choice(self._pvecs(rng, n + 2))
            vector = self.reductions.reduce_rpartition_to_partition(inst)
            prob = self.khintchine.partition_probability(vector, p)
            try:
                recovered = self.reductions.recover_count_from_partition_prob(prob, p, inst.k, n)
            except DegenerateDenominator:
                continue
            assert recovered == report.count, f"Recovered {recovered} for {inst}, expected {report.count}"
            cases += 1
        worked = RPartitionInstance(c=(1, 1, 2), k=1)
        banzhaf = preset_probability_vector('banzhaf', 5)
        prob = self.khintchine.partition_probability(self.reductions.reduce_rpartition_to_partition(worked), banzhaf)
        assert prob == Fraction(5, 31)
        assert self.reductions.recover_count_from_partition_prob(prob, banzhaf, 1, 3) == 2
        return cases + 1

    def _random_special_form(self, rng: random.Random, n_head: int, high: int = 6) -> Tuple[Fraction, ...]:
        return special_form_vector([rng.randint(1, high) for _ in range(n_head)])

    def check_triple_identities(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n_head = rng.randint(1, max(1, self.max_n - 2))
            a = self._random_special_form(rng, n_head)
            p = self._random_p(rng, n_head + 2)
            triple = self.reductions.build_khintchine_triple(a)
            cases_ok, violations = self.reductions.triple_case_table(triple)
            assert cases_ok, f"{violations} case-table violations for {a}"
            kd, ke, kc = self.reductions.khintchine_values(triple, p)
            assert kd + ke - kc == 2 * triple.y * self.khintchine.zero_mass_off_extremes(triple.c, p)
            recovered = self.reductions.recover_prob_from_khintchine(kd, ke, kc, triple.y, p)
            assert recovered == self.reductions.partition_probability_of(a, p)
            cases += 1
        return cases

    def check_optimization_bound(self, rng: random.Random) -> int:
        cases = 0
        sizes = range(1, min(4, self.max_n - 1))
        for n_head in sizes:
            p = self._random_p(rng, n_head + 2)
            a = self._random_special_form(rng, n_head, high=self.reductions.vertex_bound)
            closed = self.reductions.optimize_over_polytope(a, p, 'closed_form')
            for _, vertex in self.reductions.enumerate_polytope_vertices(n_head, p):
                assert sum(x * y for x, y in zip(a, vertex)) <= closed.value
            attained = self.semivalues.semivalues_bruteforce(closed.witness, p).values
            assert sum(x * y for x, y in zip(a, attained)) == closed.value
            cases += 1
        banzhaf = preset_probability_vector('banzhaf', 4)
        assert self.reductions.optimize_over_polytope([1, 1, -1, -1], banzhaf).value == 3
        return cases + 1

    def check_pton(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n_head = rng.randint(1, max(1, self.max_n - 2))
            a = self._random_special_form(rng, n_head)
            p = self._random_p(rng, n_head + 2)
            assert self.reductions.pton_identities(a, p) == (True, True), f"Transfer identity fails for {a}"
            values = self.semivalues.semivalues_bruteforce(WeightedGame(a, Fraction(0)), p).values
            wrong = values[:-1] + (values[-1] + 1,)
            assert self.reductions.verify_restricted(a, values, p)
            assert not self.reductions.verify_restricted(a, wrong, p)
            cases += 1
        return cases

    def check_equal_semivalues(self, rng: random.Random) -> int:
        cases = 0
        for n in range(1, min(5, self.max_n) + 1):
            result = self.inverse.equal_semivalue_search(n, 2, self._random_p(rng, n))
            assert result.counterexamples == 0, f"{result.counterexamples} counterexamples at n={n}"
            cases += result.games
        return cases

    def check_inverse(self, rng: random.Random) -> int:
        banzhaf = preset_probability_vector('banzhaf', 3)
        found = self.inverse.inverse_exact(InverseInstance((Fraction(1),) * 3, Fraction(0), banzhaf))
        assert found.status == 'found'
        assert self.semivalues.verify_semivalues(found.game, banzhaf, (1, 1, 1))
        shapley = preset_probability_vector('shapley', 3)
        dictator = self.inverse.inverse_exact(InverseInstance((Fraction(2), Fraction(0), Fraction(0)),
                                                              Fraction(0), shapley))
        assert dictator.status == 'found'
        cases = 2
        for _ in range(self.rounds):
            n = rng.randint(1, min(4, self.max_n))
            weights = [rng.randint(0, self.inverse.bound) for _ in range(n)]
            if not any(weights):
                continue
            theta = rng.randint(-n, n)
            p = self._random_p(rng, n)
            game = make_game(weights, theta)
            targets = list(self.semivalues.semivalues_bruteforce(game, p).values)
            if rng.random() < 0.5:
                targets[0] += Fraction(1, 2)
            expected = self.semivalues.verify_semivalues(game, p, targets)
            assert self.inverse.verification_via_inverse(weights, theta, targets, p) == expected
            cases += 1
        return cases

    def check_symmetric_players(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(2, max(2, min(self.max_n, EXHAUSTIVE_N)))
            weights = [rng.randint(-20, 20) for _ in range(n)]
            i, j = rng.sample(range(n), 2)
            weights[j] = weights[i]
            values = self.semivalues.semivalues_bruteforce(make_game(weights, rng.randint(-20, 20)),
                                                           self._random_p(rng, n)).values
            assert values[i] == values[j], f"Players {i} and {j} share weight {weights[i]} but differ"
            cases += 1
        return cases

    def check_null_player(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            weights = [rng.randint(-20, 20) for _ in range(n)]
            i = rng.randrange(n)
            weights[i] = 0
            values = self.semivalues.semivalues_bruteforce(make_game(weights, rng.randint(-20, 20)),
                                                           self._random_p(rng, n)).values
            assert values[i] == 0, f"Null player {i} of {weights} has value {values[i]}"
            cases += 1
        return cases

    def check_semivalue_scaling(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g, p = self._random_game(rng, n), self._random_p(rng, n)
            scaled = scale_game(g, self._random_scale(rng))
            assert self.semivalues.semivalues_bruteforce(scaled, p) == self.semivalues.semivalues_bruteforce(g, p)
            cases += 1
        return cases

    def check_nonnegative_range(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            g = self._random_game(rng, n, low=0)
            for p in self._pvecs(rng, n):
                values = self.semivalues.semivalues_bruteforce(g, p).values
                assert all(0 <= v <= 2 for v in values), f"Values {values} outside [0, 2] for {g}"
                cases += 1
        return cases

    def check_khintchine_sign(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            a = [rng.randint(-6, 6) for _ in range(n)]
            negated = [-v for v in a]
            p = self._random_p(rng, n)
            assert self.khintchine.khintchine(a, p).value == self.khintchine.khintchine(negated, p).value
            assert self.khintchine.partition_probability(a, p) == self.khintchine.partition_probability(negated, p)
            cases += 1
        return cases

    def check_khintchine_permutation(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, min(self.max_n, EXHAUSTIVE_N))
            a = [rng.randint(-6, 6) for _ in range(n)]
            shuffled = list(a)
            rng.shuffle(shuffled)
            p = self._random_p(rng, n)
            assert self.khintchine.khintchine(a, p, 'brute').value == \
                self.khintchine.khintchine(shuffled, p, 'brute').value, f"Permuting {a} changes K"
            cases += 1
        return cases

    def check_khintchine_triangle(self, rng: random.Random) -> int:
        cases = 0
        for _ in range(self.rounds):
            n = rng.randint(1, self.max_n)
            a = [rng.randint(-6, 6) for _ in range(n)]
            b = [rng.randint(-6, 6) for _ in range(n)]
            p = self._random_p(rng, n)
            joint = self.khintchine.khintchine([x + y for x, y in zip(a, b)], p).value
            assert joint <= self.khintchine.khintchine(a, p).value + self.khintchine.khintchine(b, p).value
            cases += 1
        return cases

    def check_census(self, rng: random.Random) -> int:
        assert len(self.inverse.enumerate_canonical_games(1, 1)) == 3
        assert len(self.inverse.enumerate_canonical_games(2, 1)) == 6
        cases = 2
        for n in range(1, min(3, self.max_n) + 1):
            tables = [truth_table(g) for g in self.inverse.enumerate_canonical_games(n, 2)]
            assert len(tables) == len(set(tables)), f"Duplicate classes in the census at n={n}"
            cases += 1
        return cases

    def checks(self) -> List[Tuple[str, Check]]:
        return [
            ("distribution_normalized", self.check_distribution),
            ("presets_valid", self.check_presets_valid),
            ("reasonable_draws", self.check_reasonable_draws),
            ("eval_scaling_invariance", self.check_eval_scaling),
            ("lambda_closed_form", self.check_lambda),
            ("dp_matches_bruteforce", self.check_dp_matches_bruteforce),
            ("reformulation_identity", self.check_reformulation),
            ("fixed_points", self.check_fixed_points),
            ("symmetric_players", self.check_symmetric_players),
            ("null_player", self.check_null_player),
            ("semivalue_scaling_invariance", self.check_semivalue_scaling),
            ("nonnegative_weights_range", self.check_nonnegative_range),
            ("shapley_efficiency", self.check_shapley_efficiency),
            ("banzhaf_is_twice_chow", self.check_banzhaf_chow),
            ("khintchine_methods_agree", self.check_khintchine_methods),
            ("khintchine_sign_invariance", self.check_khintchine_sign),
            ("khintchine_permutation_invariance", self.check_khintchine_permutation),
            ("khintchine_triangle", self.check_khintchine_triangle),
            ("rpartition_count_recovery", self.check_rpartition_recovery),
            ("khintchine_triple_identities", self.check_triple_identities),
            ("optimization_bound_tight", self.check_optimization_bound),
            ("positive_weight_transfer", self.check_pton),
            ("equal_semivalues_equal_functions", self.check_equal_semivalues),
            ("canonical_census", self.check_census),
            ("inverse_soundness", self.check_inverse),
        ] + self.extra_checks

    def run(self) -> SelftestReport:
        report = SelftestReport()
        for offset, (name, check) in enumerate(self.checks()):
            rng = random.Random(self.seed + offset)
            start = time.perf_counter()
            result = InvariantResult(name=name, passed=True)
            try:
                result.cases = check(rng)
            except AssertionError as e:
                result.passed = False
                result.detail = str(e) or "assertion failed"
            except SemivalueError as e:
                result.passed = False
                result.detail = f"{e.code}: {e.message}"
            except Exception as e:
                result.passed = False
                result.detail = f"{type(e).__name__}: {e}"
                logger.exception(f"Invariant {name} raised")
            result.elapsed_ms = (time.perf_counter() - start) * 1000.0
            report.results.append(result)
            logger.logjson("INFO" if result.passed else "ERROR", "Invariant checked", {
                "invariant": name, "passed": result.passed, "cases": result.cases,
            })
        return report
