"""Exhaustive runs at full desk scale; deselect with -m "not slow"."""

import random
from fractions import Fraction
from itertools import product

import pytest

from src.services.game_model import (
    WeightedGame,
    make_game,
    preset_probability_vector,
    random_probability_vector,
)
from src.services.inverse_service import InverseInstance
from src.services.reduction_service import RPartitionInstance, special_form_vector
from src.utils.error_utils import DegenerateDenominator

pytestmark = pytest.mark.slow


def _random_game(r, n, low=-20, high=20):
    return make_game([r.randint(low, high) for _ in range(n)], r.randint(low, high))


def test_pivot_dp_matches_bruteforce_at_scale(semivalue_service):
    r = random.Random(1)
    for _ in range(500):
        n = r.randint(1, 12)
        g, p = _random_game(r, n), random_probability_vector(n, r)
        assert semivalue_service.semivalues_pivot_dp(g, p) == semivalue_service.semivalues_bruteforce(g, p), g


def test_reformulation_identity_at_scale(semivalue_service):
    r = random.Random(2)
    for _ in range(200):
        n = r.randint(1, 10)
        g, p = _random_game(r, n), random_probability_vector(n, r)
        terms = semivalue_service.reformulation_terms(g, p)
        assert terms.semivalues() == semivalue_service.semivalues_bruteforce(g, p).values


def test_dictator_for_twenty_vectors(semivalue_service):
    r = random.Random(3)
    for _ in range(20):
        n = r.randint(1, 10)
        dictator = make_game([1] + [0] * (n - 1))
        values = semivalue_service.semivalues_bruteforce(dictator, random_probability_vector(n, r)).values
        assert values == (2,) + (0,) * (n - 1)


def test_count_recovery_on_hundred_instances(reduction_service, khintchine_service):
    r = random.Random(4)
    instances = []
    while len(instances) < 100:
        n = r.randint(2, 10)
        ks = [k for k in range(1, n + 1) if Fraction(n, 4) <= k <= Fraction(3 * n, 4)]
        inst = RPartitionInstance(c=tuple(r.randint(1, 6) for _ in range(n)), k=r.choice(ks))
        report = reduction_service.check_rpartition_promise(inst)
        if report.holds:
            instances.append((inst, report.count))
    assert any(count > 0 for _, count in instances)

    recovered = 0
    for inst, count in instances:
        size = inst.n + 2
        vectors = [preset_probability_vector('banzhaf', size), preset_probability_vector('shapley', size)]
        vectors += [random_probability_vector(size, r) for _ in range(5)]
        reduced = reduction_service.reduce_rpartition_to_partition(inst)
        for p in vectors:
            prob = khintchine_service.partition_probability(reduced, p)
            try:
                assert reduction_service.recover_count_from_partition_prob(prob, p, inst.k, inst.n) == count, inst
            except DegenerateDenominator:
                continue
            recovered += 1
    # the presets are positive everywhere, so at least those never degenerate
    assert recovered >= 200


def test_triple_identities_on_hundred_vectors(reduction_service):
    r = random.Random(5)
    for _ in range(100):
        a = special_form_vector([r.randint(1, 6) for _ in range(r.randint(1, 8))])
        p = random_probability_vector(len(a), r)
        triple = reduction_service.build_khintchine_triple(a, Fraction(1, 4))
        assert reduction_service.triple_case_table(triple) == (True, 0), a
        kd, ke, kc = reduction_service.khintchine_values(triple, p)
        assert kd + ke - kc == 2 * triple.y * reduction_service.khintchine.zero_mass_off_extremes(triple.c, p)
        assert reduction_service.recover_prob_from_khintchine(kd, ke, kc, triple.y, p) == \
            reduction_service.partition_probability_of(a, p)


@pytest.mark.parametrize("n_head", range(1, 5))
def test_closed_form_is_tight_over_vertices(reduction_service, n_head):
    r = random.Random(6 + n_head)
    for p in (preset_probability_vector('banzhaf', n_head + 2), random_probability_vector(n_head + 2, r)):
        for head in product(range(1, 4), repeat=n_head):
            a = special_form_vector(head)
            closed = reduction_service.optimize_over_polytope(a, p)
            for _, vertex in reduction_service.enumerate_polytope_vertices(n_head, p, bound=3):
                assert sum(x * y for x, y in zip(a, vertex)) <= closed.value
            attained = reduction_service.semivalues.semivalues_bruteforce(closed.witness, p).values
            assert sum(x * y for x, y in zip(a, attained)) == closed.value


def test_transfer_identities_on_hundred_instances(reduction_service):
    r = random.Random(7)
    for _ in range(100):
        a = special_form_vector([r.randint(1, 6) for _ in range(r.randint(1, 8))])
        assert reduction_service.pton_identities(a, random_probability_vector(len(a), r)) == (True, True), a


@pytest.mark.parametrize("n_head", range(1, 5))
def test_restricted_verification_preserves_answers_exhaustively(reduction_service, n_head):
    for name in ('banzhaf', 'shapley'):
        p = preset_probability_vector(name, n_head + 2)
        for head in product(range(1, 4), repeat=n_head):
            a = special_form_vector(head)
            values = reduction_service.semivalues.semivalues_bruteforce(WeightedGame(a, Fraction(0)), p).values
            assert reduction_service.verify_restricted(a, values, p)
            wrong = values[:-1] + (values[-1] + 1,)
            assert not reduction_service.verify_restricted(a, wrong, p)


def test_verification_through_inversion_on_two_hundred_instances(inverse_service, semivalue_service):
    r = random.Random(8)
    cases = 0
    while cases < 200:
        n = r.randint(1, 4)
        weights = [r.randint(0, inverse_service.bound) for _ in range(n)]
        if not any(weights):
            continue
        theta = r.randint(-n, n)
        p = random_probability_vector(n, r)
        game = make_game(weights, theta)
        targets = list(semivalue_service.semivalues_bruteforce(game, p).values)
        if r.random() < 0.5:
            targets[r.randrange(n)] += Fraction(1, 2)
        expected = semivalue_service.verify_semivalues(game, p, targets)
        assert inverse_service.verification_via_inverse(weights, theta, targets, p) == expected, (weights, theta)

        found = inverse_service.inverse_exact(InverseInstance(tuple(targets), Fraction(theta, sum(weights)), p))
        if found.status == 'found':
            assert semivalue_service.verify_semivalues(found.game, p, targets)
        cases += 1
