import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from src.services.game_model import (
    WeightedGame,
    make_game,
    make_probability_vector,
    preset_probability_vector,
    random_probability_vector,
)
from src.services.khintchine_service import KhintchineService
from src.services.reduction_service import (
    CaratheodoryCertificate,
    ReductionService,
    RPartitionInstance,
    is_special_form,
    pton_shifts,
    solve_convex_coefficients,
    special_form_vector,
)
from src.services.semivalue_service import SemivalueService
from src.utils.error_utils import (
    ArityMismatch,
    BadShape,
    BadY,
    DegenerateDenominator,
    InstanceTooLarge,
    OddTotalSum,
    PreconditionViolated,
    ShapeViolation,
)

SQUARE = special_form_vector([1, 1])


def _service():
    return ReductionService(SemivalueService(cap=12), KhintchineService(cap=12))


def test_special_form_detection():
    assert SQUARE == (1, 1, -1, -1)
    assert is_special_form(SQUARE)
    assert not is_special_form((1, 1, -1, -2))
    assert not is_special_form((0, 2, -1, -1))


def test_instance_validation():
    with pytest.raises(BadShape):
        RPartitionInstance(c=(1, 0, 2), k=1)
    with pytest.raises(BadShape):
        RPartitionInstance(c=(), k=1)


def test_promise_window(reduction_service):
    reduction_service.validate_rpartition_instance(RPartitionInstance(c=(1, 1, 2), k=1))
    with pytest.raises(PreconditionViolated):
        reduction_service.validate_rpartition_instance(RPartitionInstance(c=(1, 1, 2), k=3))
    with pytest.raises(OddTotalSum):
        reduction_service.validate_rpartition_instance(RPartitionInstance(c=(1, 2, 2), k=1), require_even=True)


def test_promise_count(reduction_service):
    report = reduction_service.check_rpartition_promise(RPartitionInstance(c=(1, 1, 2), k=1))
    assert report.holds and report.count == 2
    assert report.solution_sizes == (1, 2)


def test_promise_count_of_equal_pair(reduction_service):
    report = reduction_service.check_rpartition_promise(RPartitionInstance(c=(2, 2), k=1))
    assert report.holds and report.count == 2


def test_odd_total_has_no_solutions(reduction_service):
    report = reduction_service.check_rpartition_promise(RPartitionInstance(c=(1, 2), k=1))
    assert report.holds and report.count == 0 and report.odd_total


def test_promise_violation_detected(reduction_service):
    report = reduction_service.check_rpartition_promise(RPartitionInstance(c=(1, 1, 1, 1, 2, 2), k=2))
    assert not report.holds


@pytest.mark.parametrize("c, expected", [
    ((1, 1), (1, 1, -1, -1)),
    ((1, 2), (2, 4, -3, -3)),
    ((1, 1, 2), (1, 1, 2, -2, -2)),
])
def test_reduce_rpartition(reduction_service, c, expected):
    assert reduction_service.reduce_rpartition_to_partition(RPartitionInstance(c=c, k=1)) == expected


def test_worked_instance_end_to_end(reduction_service, khintchine_service):
    inst = RPartitionInstance(c=(1, 1, 2), k=1)
    p = preset_probability_vector('banzhaf', 5)
    prob = khintchine_service.partition_probability(reduction_service.reduce_rpartition_to_partition(inst), p)
    assert prob == Fraction(5, 31)
    assert reduction_service.recover_count_from_partition_prob(prob, p, 1, 3) == 2


def test_equal_pair_end_to_end(reduction_service, khintchine_service):
    inst = RPartitionInstance(c=(2, 2), k=1)
    p = preset_probability_vector('banzhaf', 4)
    prob = khintchine_service.partition_probability(reduction_service.reduce_rpartition_to_partition(inst), p)
    assert prob == Fraction(1, 3)
    assert reduction_service.recover_count_from_partition_prob(prob, p, 1, 2) == 2


def test_degenerate_denominator(reduction_service):
    p = make_probability_vector([1, 0, 0, 0, 0])
    with pytest.raises(DegenerateDenominator):
        reduction_service.recover_count_from_partition_prob(Fraction(1, 2), p, 1, 3)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(c=st.lists(st.integers(1, 6), min_size=2, max_size=7), data=st.data())
def test_count_recovery_on_promise_instances(c, data):
    service = _service()
    n = len(c)
    k = data.draw(st.integers(1, n))
    assume(Fraction(n, 4) <= k <= Fraction(3 * n, 4))
    inst = RPartitionInstance(c=tuple(c), k=k)
    report = service.check_rpartition_promise(inst)
    assume(report.holds)
    preset = data.draw(st.sampled_from(['banzhaf', 'shapley']))
    p = preset_probability_vector(preset, n + 2)
    prob = service.khintchine.partition_probability(service.reduce_rpartition_to_partition(inst), p)
    assert service.recover_count_from_partition_prob(prob, p, k, n) == report.count


def test_triple_construction(reduction_service):
    triple = reduction_service.build_khintchine_triple(SQUARE, Fraction(1, 4))
    assert triple.c == (2, 2, -2, -2)
    assert triple.d == (Fraction(3, 4), 1, Fraction(-7, 8), Fraction(-7, 8))
    assert triple.e == (Fraction(5, 4), 1, Fraction(-9, 8), Fraction(-9, 8))


def test_triple_rejects_bad_inputs(reduction_service):
    with pytest.raises(BadShape):
        reduction_service.build_khintchine_triple([1, 1, -1, -2])
    with pytest.raises(BadY):
        reduction_service.build_khintchine_triple(SQUARE, Fraction(1, 2))
    with pytest.raises(BadY):
        reduction_service.build_khintchine_triple(special_form_vector(['1/2', '1/2']), Fraction(1, 4))


@settings(max_examples=40, deadline=None)
@given(head=st.lists(st.integers(1, 6), min_size=1, max_size=6), seed=st.integers(0, 10 ** 6))
def test_triple_identities(head, seed):
    service = _service()
    a = special_form_vector(head)
    p = random_probability_vector(len(a), random.Random(seed))
    triple = service.build_khintchine_triple(a)
    assert service.triple_case_table(triple) == (True, 0)
    kd, ke, kc = service.khintchine_values(triple, p)
    assert kd + ke - kc == 2 * triple.y * service.khintchine.zero_mass_off_extremes(triple.c, p)
    assert service.recover_prob_from_khintchine(kd, ke, kc, triple.y, p) == service.partition_probability_of(a, p)


def test_recovered_probability_of_square(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    triple = reduction_service.build_khintchine_triple(SQUARE)
    kd, ke, kc = reduction_service.khintchine_values(triple, p)
    assert reduction_service.recover_prob_from_khintchine(kd, ke, kc, triple.y, p) == Fraction(1, 3)


def test_closed_form_optimum(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    result = reduction_service.optimize_over_polytope(SQUARE, p)
    assert result.value == 3
    assert result.witness == WeightedGame(SQUARE, Fraction(0))


def test_vertex_enumeration_agrees(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    result = reduction_service.optimize_over_polytope(SQUARE, p, mode='vertex_enum')
    assert result.value == 3
    assert result.vertices_examined >= 1


@pytest.mark.parametrize("seed", range(6))
def test_closed_form_dominates_vertices(reduction_service, seed):
    r = random.Random(seed)
    n_head = r.randint(1, 3)
    a = special_form_vector([r.randint(1, 3) for _ in range(n_head)])
    p = random_probability_vector(n_head + 2, r)
    closed = reduction_service.optimize_over_polytope(a, p)
    for _, vertex in reduction_service.enumerate_polytope_vertices(n_head, p):
        assert sum(x * y for x, y in zip(a, vertex)) <= closed.value
    assert reduction_service.optimize_over_polytope(a, p, mode='vertex_enum').value == closed.value


def test_vertex_enumeration_limit(semivalue_service, khintchine_service):
    service = ReductionService(semivalue_service, khintchine_service, vertex_max_players=4)
    with pytest.raises(InstanceTooLarge):
        service.optimize_over_polytope(special_form_vector([1, 1, 1]), preset_probability_vector('banzhaf', 5),
                                       mode='vertex_enum')


@pytest.mark.parametrize("bound", [0, -1])
def test_vertex_enumeration_needs_a_positive_bound(reduction_service, bound):
    banzhaf = preset_probability_vector('banzhaf', 4)
    with pytest.raises(PreconditionViolated):
        reduction_service.enumerate_polytope_vertices(2, banzhaf, bound=bound)
    with pytest.raises(PreconditionViolated):
        reduction_service.optimize_over_polytope(SQUARE, banzhaf, mode='vertex_enum', bound=bound)


def test_single_head_has_one_vertex(reduction_service):
    assert len(reduction_service.enumerate_polytope_vertices(1, preset_probability_vector('banzhaf', 3))) == 1


def test_convex_coefficients():
    vertices = [(0, 0), (2, 0), (0, 2)]
    assert solve_convex_coefficients((Fraction(1, 2), Fraction(1, 2)), vertices) == (
        Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)
    )
    assert solve_convex_coefficients((2, 2), vertices) is None
    assert solve_convex_coefficients((1, 1), [(0, 0), (2, 0)]) is None


def _two_witnesses():
    return [WeightedGame(SQUARE, Fraction(0)), make_game([2, 1, '-3/2', '-3/2'])]


def test_membership_certificate_round_trip(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    witnesses = _two_witnesses()
    vertices = [reduction_service.semivalues.semivalues_bruteforce(w, p).values for w in witnesses]
    assert vertices[0] != vertices[1]
    point = tuple((x + y) / 2 for x, y in zip(*vertices))
    cert = reduction_service.build_membership_certificate(point, witnesses, p)
    assert cert.lambdas == (Fraction(1, 2), Fraction(1, 2))
    assert reduction_service.verify_membership_certificate(cert, p)

    tampered = CaratheodoryCertificate(cert.point, cert.vertices, cert.witnesses, (Fraction(1, 3), Fraction(2, 3)))
    assert not reduction_service.verify_membership_certificate(tampered, p)


def test_membership_certificate_shape_checks(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    with pytest.raises(ShapeViolation):
        reduction_service.build_membership_certificate((0, 0, 0, 0), [make_game([1, 1, 1, 1])], p)
    with pytest.raises(ArityMismatch):
        reduction_service.build_membership_certificate((0, 0, 0, 0), _two_witnesses() * 3, p)
    witness = WeightedGame(SQUARE, Fraction(0))
    vertex = reduction_service.semivalues.semivalues_bruteforce(witness, p).values
    bad = CaratheodoryCertificate(vertex, (vertex,), (make_game(SQUARE, 1),), (Fraction(1),))
    with pytest.raises(ShapeViolation):
        reduction_service.verify_membership_certificate(bad, p)


def test_point_outside_hull(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    with pytest.raises(PreconditionViolated):
        reduction_service.build_membership_certificate((5, 5, 5, 5), _two_witnesses(), p)


def test_banzhaf_shifts():
    first, tail = pton_shifts(2, preset_probability_vector('banzhaf', 4))
    assert first == 0
    assert tail == Fraction(3, 2)


def test_pton_transform_of_square(reduction_service):
    p = preset_probability_vector('banzhaf', 4)
    targets = (Fraction(3, 4), Fraction(3, 4), Fraction(-3, 4), Fraction(-3, 4))
    instance = reduction_service.pton_transform(SQUARE, targets, p)
    assert instance.game.weights == (1, 1, 1, 1)
    assert instance.targets == (Fraction(3, 4),) * 4
    assert reduction_service.verify_restricted(SQUARE, targets, p)
    assert not reduction_service.verify_restricted(SQUARE, (1, 1, -1, -1), p)


@settings(max_examples=40, deadline=None)
@given(head=st.lists(st.integers(1, 6), min_size=1, max_size=6), seed=st.integers(0, 10 ** 6))
def test_transfer_identities(head, seed):
    service = _service()
    a = special_form_vector(head)
    p = random_probability_vector(len(a), random.Random(seed))
    assert service.pton_identities(a, p) == (True, True)


@pytest.mark.parametrize("seed", range(10))
def test_restricted_verification_preserves_answers(reduction_service, seed):
    r = random.Random(seed)
    a = special_form_vector([r.randint(1, 4) for _ in range(r.randint(1, 4))])
    p = random_probability_vector(len(a), r)
    values = reduction_service.semivalues.semivalues_bruteforce(WeightedGame(a, Fraction(0)), p).values
    assert reduction_service.verify_restricted(a, values, p)
    wrong = values[:-1] + (values[-1] + Fraction(1, 7),)
    assert not reduction_service.verify_restricted(a, wrong, p)


def test_pton_rejects_general_games(reduction_service):
    with pytest.raises(BadShape):
        reduction_service.pton_transform((1, 2, 3), (0, 0, 0), preset_probability_vector('banzhaf', 3))


def test_rpartition_trace(reduction_service):
    trace = reduction_service.trace_rpartition(RPartitionInstance(c=(1, 1, 2), k=1),
                                               preset_probability_vector('banzhaf', 5))
    assert trace.recovered == "2"
    assert trace.output["partition_probability"] == "5/31"
    assert trace.all_checks_pass


def test_khintchine_trace(reduction_service):
    trace = reduction_service.trace_khintchine(SQUARE, preset_probability_vector('shapley', 4))
    assert trace.all_checks_pass


def test_optimize_trace(reduction_service):
    trace = reduction_service.trace_optimize(SQUARE, preset_probability_vector('banzhaf', 4), mode='vertex_enum')
    assert trace.recovered == "3"
    assert trace.all_checks_pass


def test_pton_trace(reduction_service):
    targets = (Fraction(3, 4), Fraction(3, 4), Fraction(-3, 4), Fraction(-3, 4))
    trace = reduction_service.trace_pton(SQUARE, targets, preset_probability_vector('banzhaf', 4))
    assert trace.output["answer"] is True
    assert trace.all_checks_pass
