"""
Executable versions of the counting reductions from #R-Partition down to
linear optimization over the semivalue polytope, with the exact recovery
formulas and the identity checks that make each step auditable.

A special-form vector has n positive head coordinates followed by two tail
coordinates equal to -A/2, where A is the head sum. Special-form games use
that vector as weights with threshold 0.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..utils.error_utils import (
    ArityMismatch,
    BadShape,
    BadY,
    DegenerateDenominator,
    InstanceTooLarge,
    OddTotalSum,
    PreconditionViolated,
    ShapeViolation,
    handle_operation_error,
    require_cap,
    require_dimension,
)
from ..utils.logging_utils import get_logger
from ..utils.rational_utils import (
    binomial,
    format_rational,
    format_rational_list,
    parse_rational,
    parse_rational_list,
    scale_to_integers,
)
from .game_model import ProbabilityVector, WeightedGame, all_assignments, lambda_norm, truth_table
from .khintchine_service import KhintchineService
from .semivalue_service import SemivalueService, semivalues_from_table

logger = get_logger(__name__)

OPTIMIZE_MODES = ('closed_form', 'vertex_enum')


@dataclass(frozen=True)
class RPartitionInstance:
    """#R-Partition input: positive integers c and the promised size k"""

    c: Tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        if not self.c:
            raise BadShape("An #R-Partition instance needs at least one number")
        if any(not isinstance(v, int) or isinstance(v, bool) or v <= 0 for v in self.c):
            raise BadShape("#R-Partition numbers must be positive integers", {"c": list(self.c)})
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k <= 0:
            raise BadShape("k must be a positive integer", {"k": self.k})

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class PromiseReport:
    holds: bool
    count: int
    odd_total: bool
    solution_sizes: Tuple[int, ...]


@dataclass(frozen=True)
class KhintchineTriple:
    a: Tuple[Fraction, ...]
    c: Tuple[Fraction, ...]
    d: Tuple[Fraction, ...]
    e: Tuple[Fraction, ...]
    y: Fraction


@dataclass(frozen=True)
class CaratheodoryCertificate:
    point: Tuple[Fraction, ...]
    vertices: Tuple[Tuple[Fraction, ...], ...]
    witnesses: Tuple[WeightedGame, ...]
    lambdas: Tuple[Fraction, ...]


@dataclass(frozen=True)
class OptimizationResult:
    value: Fraction
    witness: WeightedGame
    vertex: Optional[Tuple[Fraction, ...]]
    mode: str
    vertices_examined: int = 0


@dataclass(frozen=True)
class PtonInstance:
    """SV-Verification instance with positive weights produced from a special-form one"""

    game: WeightedGame
    targets: Tuple[Fraction, ...]
    first_shift: Fraction
    tail_shift: Fraction


@dataclass
class ReductionTrace:
    step: str
    input: Dict[str, Any]
    output: Dict[str, Any]
    recovered: Optional[str]
    checks: Dict[str, bool] = field(default_factory=dict)
    timing_ms: Optional[float] = None

    @property
    def all_checks_pass(self) -> bool:
        return all(self.checks.values())


def is_special_form(a: Sequence[Fraction]) -> bool:
    if len(a) < 3:
        return False
    head = a[:-2]
    half = sum(head, Fraction(0)) / 2
    return all(v > 0 for v in head) and a[-2] == -half and a[-1] == -half


def require_special_form(a: Sequence[Fraction], error=BadShape) -> None:
    if not is_special_form(a):
        raise error(
            "Expected (a_1..a_n, -A/2, -A/2) with every a_i > 0 and A = sum a_i",
            {"vector": format_rational_list(a)},
        )


def special_form_vector(head: Sequence) -> Tuple[Fraction, ...]:
    head = parse_rational_list(head)
    half = sum(head, Fraction(0)) / 2
    return tuple(head) + (-half, -half)


def is_special_form_game(g: WeightedGame) -> bool:
    return g.theta == 0 and is_special_form(g.weights)


def pton_shifts(n_head: int, p: ProbabilityVector) -> Tuple[Fraction, Fraction]:
    """
    Target shifts relating the special-form game f and its positive twin g

    Returns:
        tuple: (first, tail) with g(i) = f(i) - first for head players and
        g(i) = f(i) + tail for the two tail players
    """
    first = 2 * (p.p(n_head + 1) - p.p(n_head - 1))
    tail = 2 * sum((binomial(n_head, t) * (p.p(t) + p.p(t + 1)) for t in range(n_head)), Fraction(0))
    return first, tail


def solve_convex_coefficients(point: Sequence[Fraction],
                              vertices: Sequence[Sequence[Fraction]]) -> Optional[Tuple[Fraction, ...]]:
    """
    Exact Gauss-Jordan solve of [vertices^T ; 1..1] lambda = [point ; 1]

    Free variables are fixed at 0. Returns None when the system is
    inconsistent or the particular solution has a negative coefficient.
    """
    m = len(vertices)
    size = len(point)
    rows = [[Fraction(v[r]) for v in vertices] + [Fraction(point[r])] for r in range(size)]
    rows.append([Fraction(1)] * m + [Fraction(1)])

    pivot_columns: List[int] = []
    r = 0
    for col in range(m):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivot_columns.append(col)
        r += 1
        if r == len(rows):
            break

    if any(rows[i][m] != 0 for i in range(r, len(rows))):
        return None
    lambdas = [Fraction(0)] * m
    for i, col in enumerate(pivot_columns):
        lambdas[col] = rows[i][m]
    if any(v < 0 for v in lambdas):
        return None
    return tuple(lambdas)


class ReductionService:
    """The reduction chain as checkable instance transformations"""

    def __init__(self, semivalue_service: SemivalueService, khintchine_service: KhintchineService,
                 cap: int = 20, vertex_bound: int = 3, vertex_max_players: int = 8,
                 promise_b1: Fraction = Fraction(1, 4), promise_b2: Fraction = Fraction(3, 4),
                 y: Fraction = Fraction(1, 4)):
        self.semivalues = semivalue_service
        self.khintchine = khintchine_service
        self.cap = cap
        self.vertex_bound = vertex_bound
        self.vertex_max_players = vertex_max_players
        self.promise_b1 = Fraction(promise_b1)
        self.promise_b2 = Fraction(promise_b2)
        self.y = Fraction(y)

    @classmethod
    def from_config(cls, config, semivalue_service: SemivalueService,
                    khintchine_service: KhintchineService) -> "ReductionService":
        return cls(
            semivalue_service,
            khintchine_service,
            cap=config.cap,
            vertex_bound=config.vertex_bound,
            vertex_max_players=config.vertex_max_players,
            promise_b1=config.promise_b1,
            promise_b2=config.promise_b2,
            y=config.khintchine_y,
        )

    # #R-Partition -> #Partition_mu

    def validate_rpartition_instance(self, inst: RPartitionInstance, require_even: bool = False) -> None:
        n = inst.n
        if not (self.promise_b1 * n <= inst.k <= self.promise_b2 * n):
            raise PreconditionViolated(
                f"k = {inst.k} is outside [{format_rational(self.promise_b1 * n)}, "
                f"{format_rational(self.promise_b2 * n)}]",
                {"k": inst.k, "n": n},
            )
        if require_even and sum(inst.c) % 2:
            raise OddTotalSum("The total is odd, so no half-sum subset exists", {"total": sum(inst.c)})

    @handle_operation_error
    def check_rpartition_promise(self, inst: RPartitionInstance) -> PromiseReport:
        """Count half-sum subsets and check that each has size k or n - k"""
        require_cap(inst.n, self.cap, "check_rpartition_promise")
        total = sum(inst.c)
        if total % 2:
            return PromiseReport(holds=True, count=0, odd_total=True, solution_sizes=())

        half = total // 2
        count = 0
        sizes = set()
        holds = True
        for chosen in product((0, 1), repeat=inst.n):
            if sum(c for c, bit in zip(inst.c, chosen) if bit) != half:
                continue
            count += 1
            size = sum(chosen)
            sizes.add(size)
            if size not in (inst.k, inst.n - inst.k):
                holds = False
        return PromiseReport(holds=holds, count=count, odd_total=False, solution_sizes=tuple(sorted(sizes)))

    def reduce_rpartition_to_partition(self, inst: RPartitionInstance) -> Tuple[int, ...]:
        """(c_1..c_n, -W/2, -W/2), doubled first when W is odd"""
        total = sum(inst.c)
        if total % 2:
            return tuple(2 * c for c in inst.c) + (-total, -total)
        return tuple(inst.c) + (-total // 2, -total // 2)

    @handle_operation_error
    def recover_count_from_partition_prob(self, prob, p: ProbabilityVector, k: int, n: int) -> Fraction:
        """(Lambda * prob - (p_{n+1} + p_0)) / (p_{n-k+1} + p_{n-k} + p_{k+1} + p_k)"""
        prob = parse_rational(prob)
        require_dimension(n + 2, p.n, "probability vector")
        denominator = p.p(n - k + 1) + p.p(n - k) + p.p(k + 1) + p.p(k)
        if denominator == 0:
            raise DegenerateDenominator(
                "p gives no mass to either solution weight class",
                {"k": k, "n": n},
            )
        return (lambda_norm(p) * prob - (p.p(n + 1) + p.p(0))) / denominator

    # #Partition_mu -> Khintchine_mu

    @handle_operation_error
    def build_khintchine_triple(self, a: Sequence, y=None) -> KhintchineTriple:
        a = parse_rational_list(a)
        y = self.y if y is None else parse_rational(y)
        require_special_form(a)
        if not (0 < y < Fraction(1, 2) < a[0]):
            raise BadY("Need 0 < y < 1/2 < a_1", {"y": format_rational(y), "a_1": format_rational(a[0])})

        head = list(a[:-2])
        tail = a[-1]
        c = tuple(2 * v for v in a)
        d = tuple([head[0] - y] + head[1:] + [tail + y / 2, tail + y / 2])
        e = tuple([head[0] + y] + head[1:] + [tail - y / 2, tail - y / 2])
        return KhintchineTriple(a=tuple(a), c=c, d=d, e=e, y=y)

    @handle_operation_error
    def recover_prob_from_khintchine(self, kd, ke, kc, y, p: ProbabilityVector) -> Fraction:
        """(K(d) + K(e) - K(c)) / 2y + (p_0 + p_{n+1}) / Lambda"""
        kd, ke, kc, y = (parse_rational(v) for v in (kd, ke, kc, y))
        if y <= 0:
            raise BadY("y must be positive", {"y": format_rational(y)})
        return (kd + ke - kc) / (2 * y) + (p.p(0) + p.p(p.n - 1)) / lambda_norm(p)

    def triple_case_table(self, triple: KhintchineTriple) -> Tuple[bool, int]:
        """
        Pointwise check of the case analysis behind the triple

        For every x with c . x != 0, |d.x| + |e.x| = |c.x|; for every x off
        the two constant assignments with c . x = 0 and differing tail
        coordinates, |d.x| + |e.x| = 2y.

        Returns:
            tuple: (all cases hold, number of violating assignments)
        """
        size = len(triple.c)
        require_cap(size, self.cap, "triple_case_table")
        violations = 0
        for bits in all_assignments(size):
            cx = sum((v * b for v, b in zip(triple.c, bits)), Fraction(0))
            dx = abs(sum((v * b for v, b in zip(triple.d, bits)), Fraction(0)))
            ex = abs(sum((v * b for v, b in zip(triple.e, bits)), Fraction(0)))
            if cx != 0:
                violations += dx + ex != abs(cx)
            elif len(set(bits)) > 1 and bits[-1] != bits[-2]:
                violations += dx + ex != 2 * triple.y
        return violations == 0, violations

    def khintchine_values(self, triple: KhintchineTriple, p: ProbabilityVector) -> Tuple[Fraction, Fraction, Fraction]:
        return (
            self.khintchine.khintchine(triple.d, p).value,
            self.khintchine.khintchine(triple.e, p).value,
            self.khintchine.khintchine(triple.c, p).value,
        )

    def partition_probability_of(self, a: Sequence[Fraction], p: ProbabilityVector) -> Fraction:
        """Partition probability of a rational vector through its integer rescaling"""
        integers, _ = scale_to_integers(a)
        return self.khintchine.partition_probability(integers, p)

    # Khintchine_mu -> SV-Optimization

    def enumerate_polytope_vertices(self, n_head: int, p: ProbabilityVector,
                                    bound: Optional[int] = None) -> List[Tuple[WeightedGame, Tuple[Fraction, ...]]]:
        """
        Semivalue vectors of special-form games with integer heads in [1, bound]

        A sampling of the vertices, deduplicated by truth table and kept in
        lexicographic order of the head weights.
        """
        bound = self.vertex_bound if bound is None else bound
        if bound < 1 or n_head < 1:
            raise PreconditionViolated("Vertex enumeration needs bound >= 1 and at least one head weight",
                                       {"bound": bound, "n_head": n_head})
        size = n_head + 2
        require_dimension(size, p.n, "probability vector")
        if size > self.vertex_max_players:
            raise InstanceTooLarge(
                f"Vertex enumeration needs n + 2 <= {self.vertex_max_players}",
                {"players": size, "limit": self.vertex_max_players},
            )
        seen = set()
        found = []
        for head in product(range(1, bound + 1), repeat=n_head):
            game = WeightedGame(special_form_vector(head), Fraction(0))
            table = truth_table(game)
            if table in seen:
                continue
            seen.add(table)
            found.append((game, semivalues_from_table(table, size, p).values))
        self.semivalues.metrics.increment_metric("games_examined", len(found))
        return found

    @handle_operation_error
    def optimize_over_polytope(self, a: Sequence, p: ProbabilityVector, mode: str = 'closed_form',
                               bound: Optional[int] = None) -> OptimizationResult:
        """
        max over the polytope of a . c

        closed_form uses the tight bound (Lambda/2) K_mu(a), attained by the
        special-form game with weights a. vertex_enum scans sampled vertices.
        """
        a = parse_rational_list(a)
        require_special_form(a)
        require_dimension(len(a), p.n, "probability vector")
        if mode == 'closed_form':
            value = lambda_norm(p) / 2 * self.khintchine.khintchine(a, p).value
            return OptimizationResult(value=value, witness=WeightedGame(tuple(a), Fraction(0)),
                                      vertex=None, mode=mode)
        if mode != 'vertex_enum':
            raise PreconditionViolated(f"Unknown mode {mode!r}", {"known": list(OPTIMIZE_MODES)})

        vertices = self.enumerate_polytope_vertices(len(a) - 2, p, bound)
        best_game, best_vertex = vertices[0]
        best_value = sum((x * y for x, y in zip(a, best_vertex)), Fraction(0))
        for game, vertex in vertices[1:]:
            value = sum((x * y for x, y in zip(a, vertex)), Fraction(0))
            if value > best_value:
                best_game, best_vertex, best_value = game, vertex, value
        return OptimizationResult(value=best_value, witness=best_game, vertex=best_vertex, mode=mode,
                                  vertices_examined=len(vertices))

    # Membership certificates

    def _check_certificate_shape(self, cert: CaratheodoryCertificate, p: ProbabilityVector) -> None:
        size = len(cert.point)
        require_dimension(size, p.n, "certificate point")
        m = len(cert.vertices)
        if m == 0 or m > size + 1:
            raise ArityMismatch(f"A certificate uses 1 to {size + 1} vertices, got {m}", {"m": m})
        if len(cert.witnesses) != m or len(cert.lambdas) != m:
            raise ArityMismatch(
                "vertices, witnesses and lambdas must have equal length",
                {"vertices": m, "witnesses": len(cert.witnesses), "lambdas": len(cert.lambdas)},
            )
        for index, (vertex, witness) in enumerate(zip(cert.vertices, cert.witnesses)):
            if len(vertex) != size or witness.n != size:
                raise ArityMismatch("Vertex or witness has the wrong dimension", {"index": index})
            if witness.theta != 0:
                raise ShapeViolation("Witness threshold must be 0", {"index": index})
            require_special_form(witness.weights, error=ShapeViolation)

    @handle_operation_error
    def verify_membership_certificate(self, cert: CaratheodoryCertificate, p: ProbabilityVector) -> bool:
        self._check_certificate_shape(cert, p)
        for vertex, witness in zip(cert.vertices, cert.witnesses):
            if tuple(self.semivalues.semivalues_bruteforce(witness, p).values) != tuple(vertex):
                return False
        if any(v < 0 for v in cert.lambdas) or sum(cert.lambdas, Fraction(0)) != 1:
            return False
        combined = [
            sum((lam * vertex[r] for lam, vertex in zip(cert.lambdas, cert.vertices)), Fraction(0))
            for r in range(len(cert.point))
        ]
        return tuple(combined) == tuple(cert.point)

    @handle_operation_error
    def build_membership_certificate(self, point: Sequence, witnesses: Sequence[WeightedGame],
                                     p: ProbabilityVector) -> CaratheodoryCertificate:
        point = parse_rational_list(point)
        if not witnesses or len(witnesses) > len(point) + 1:
            raise ArityMismatch(f"Need 1 to {len(point) + 1} witnesses", {"m": len(witnesses)})
        for index, witness in enumerate(witnesses):
            if not is_special_form_game(witness):
                raise ShapeViolation("Witness is not a special-form game with threshold 0", {"index": index})
        vertices = tuple(tuple(self.semivalues.semivalues_bruteforce(w, p).values) for w in witnesses)
        lambdas = solve_convex_coefficients(point, vertices)
        if lambdas is None:
            raise PreconditionViolated("The point is not a convex combination of the witnesses' vertices")
        return CaratheodoryCertificate(point=point, vertices=vertices, witnesses=tuple(witnesses), lambdas=lambdas)

    # Special-form verification -> positive-weight verification

    @handle_operation_error
    def pton_transform(self, weights: Sequence, targets: Sequence, p: ProbabilityVector) -> PtonInstance:
        weights = parse_rational_list(weights)
        targets = parse_rational_list(targets)
        require_special_form(weights)
        require_dimension(len(weights), len(targets), "targets")
        require_dimension(len(weights), p.n, "probability vector")
        n_head = len(weights) - 2
        first, tail = pton_shifts(n_head, p)
        positive = tuple(abs(w) for w in weights)
        shifted = tuple(c - first for c in targets[:n_head]) + tuple(c + tail for c in targets[n_head:])
        return PtonInstance(game=WeightedGame(positive, Fraction(0)), targets=shifted,
                            first_shift=first, tail_shift=tail)

    def verify_restricted(self, weights: Sequence, targets: Sequence, p: ProbabilityVector) -> bool:
        instance = self.pton_transform(weights, targets, p)
        return self.semivalues.verify_semivalues(instance.game, p, instance.targets)

    def pton_identities(self, weights: Sequence, p: ProbabilityVector) -> Tuple[bool, bool]:
        """Check both transfer identities between f (special form) and g (absolute weights)"""
        weights = parse_rational_list(weights)
        require_special_form(weights)
        n_head = len(weights) - 2
        first, tail = pton_shifts(n_head, p)
        f = self.semivalues.semivalues_bruteforce(WeightedGame(tuple(weights), Fraction(0)), p).values
        g = self.semivalues.semivalues_bruteforce(WeightedGame(tuple(abs(w) for w in weights), Fraction(0)), p).values
        head_ok = all(g[i] == f[i] - first for i in range(n_head))
        tail_ok = all(g[i] == f[i] + tail for i in range(n_head, n_head + 2))
        return head_ok, tail_ok

    # Traces

    def trace_rpartition(self, inst: RPartitionInstance, p: ProbabilityVector) -> ReductionTrace:
        start = time.perf_counter()
        self.validate_rpartition_instance(inst)
        report = self.check_rpartition_promise(inst)
        vector = self.reduce_rpartition_to_partition(inst)
        require_dimension(len(vector), p.n, "probability vector")
        prob = self.khintchine.partition_probability(vector, p)
        recovered = self.recover_count_from_partition_prob(prob, p, inst.k, inst.n)
        trace = ReductionTrace(
            step="rpartition",
            input={"c": list(inst.c), "k": inst.k},
            output={"vector": [str(v) for v in vector], "partition_probability": format_rational(prob),
                    "brute_force_count": report.count},
            recovered=format_rational(recovered),
            checks={"promise_holds": report.holds, "count_matches": recovered == report.count},
        )
        trace.timing_ms = (time.perf_counter() - start) * 1000.0
        return trace

    def trace_khintchine(self, a: Sequence, p: ProbabilityVector, y=None) -> ReductionTrace:
        start = time.perf_counter()
        triple = self.build_khintchine_triple(a, y)
        kd, ke, kc = self.khintchine_values(triple, p)
        recovered = self.recover_prob_from_khintchine(kd, ke, kc, triple.y, p)
        direct = self.partition_probability_of(triple.a, p)
        interior_zero = self.khintchine.zero_mass_off_extremes(triple.c, p)
        cases_ok, _ = self.triple_case_table(triple)
        trace = ReductionTrace(
            step="khintchine",
            input={"vector": format_rational_list(triple.a), "y": format_rational(triple.y)},
            output={
                "c": format_rational_list(triple.c),
                "d": format_rational_list(triple.d),
                "e": format_rational_list(triple.e),
                "K_c": format_rational(kc),
                "K_d": format_rational(kd),
                "K_e": format_rational(ke),
                "partition_probability": format_rational(direct),
            },
            recovered=format_rational(recovered),
            checks={
                "case_table": cases_ok,
                "triple_identity": kd + ke - kc == 2 * triple.y * interior_zero,
                "recovered_matches_partition_probability": recovered == direct,
            },
        )
        trace.timing_ms = (time.perf_counter() - start) * 1000.0
        return trace

    def trace_optimize(self, a: Sequence, p: ProbabilityVector, mode: str = 'closed_form',
                       bound: Optional[int] = None) -> ReductionTrace:
        start = time.perf_counter()
        a = parse_rational_list(a)
        closed = self.optimize_over_polytope(a, p, 'closed_form')
        witness_vertex = self.semivalues.semivalues_bruteforce(closed.witness, p).values
        terms = self.semivalues.reformulation_terms(closed.witness, p)
        attained = sum((x * y for x, y in zip(a, witness_vertex)), Fraction(0))
        checks = {
            "witness_attains_bound": attained == closed.value,
            "cf_term_vanishes": sum(a, Fraction(0)) * terms.cf == 0,
        }
        output: Dict[str, Any] = {
            "witness": {"weights": format_rational_list(closed.witness.weights), "theta": "0"},
            "witness_vertex": format_rational_list(witness_vertex),
            "closed_form": format_rational(closed.value),
        }
        recovered = closed.value
        if mode == 'vertex_enum':
            enumerated = self.optimize_over_polytope(a, p, 'vertex_enum', bound)
            checks["bound_dominates_vertices"] = enumerated.value <= closed.value
            checks["modes_agree"] = enumerated.value == closed.value
            output["vertex_enum"] = format_rational(enumerated.value)
            output["vertices_examined"] = enumerated.vertices_examined
            recovered = enumerated.value
        trace = ReductionTrace(
            step="optimize",
            input={"vector": format_rational_list(a), "mode": mode},
            output=output,
            recovered=format_rational(recovered),
            checks=checks,
        )
        trace.timing_ms = (time.perf_counter() - start) * 1000.0
        return trace

    def trace_pton(self, weights: Sequence, targets: Sequence, p: ProbabilityVector) -> ReductionTrace:
        start = time.perf_counter()
        weights = parse_rational_list(weights)
        targets = parse_rational_list(targets)
        instance = self.pton_transform(weights, targets, p)
        original = WeightedGame(tuple(weights), Fraction(0))
        original_yes = tuple(self.semivalues.semivalues_bruteforce(original, p).values) == tuple(targets)
        transformed_yes = self.semivalues.verify_semivalues(instance.game, p, instance.targets)
        head_ok, tail_ok = self.pton_identities(weights, p)
        trace = ReductionTrace(
            step="pton",
            input={"weights": format_rational_list(weights), "targets": format_rational_list(targets)},
            output={
                "weights": format_rational_list(instance.game.weights),
                "theta": "0",
                "targets": format_rational_list(instance.targets),
                "first_shift": format_rational(instance.first_shift),
                "tail_shift": format_rational(instance.tail_shift),
                "answer": transformed_yes,
            },
            recovered=None,
            checks={
                "head_identity": head_ok,
                "tail_identity": tail_ok,
                "answer_preserved": original_yes == transformed_yes,
            },
        )
        trace.timing_ms = (time.perf_counter() - start) * 1000.0
        return trace
