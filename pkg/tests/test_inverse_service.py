import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.services.game_model import make_game, random_probability_vector, truth_table
from src.services.inverse_service import InverseInstance, InverseResult, InverseService, distance
from src.services.semivalue_service import SemivalueService
from src.utils.error_utils import InstanceTooLarge, PreconditionViolated, ZeroSemivalueEncountered

THIRD = Fraction(1, 3)


def _instance(targets, p, theta=0):
    return InverseInstance(targets=tuple(Fraction(t) for t in targets), theta=Fraction(theta), pvec=p)


def test_single_player_census(inverse_service):
    games = inverse_service.enumerate_canonical_games(1, 1)
    assert [(g.weights, g.theta) for g in games] == [((0,), -1), ((0,), 1), ((1,), 0)]


def test_two_player_census(inverse_service):
    games = inverse_service.enumerate_canonical_games(2, 1)
    tables = [truth_table(g) for g in games]
    assert len(tables) == len(set(tables)) == 6
    assert (-1, -1, -1, 1) in tables
    assert (-1, 1, 1, 1) in tables


def test_census_size_limit(semivalue_service):
    service = InverseService(semivalue_service, max_players=3)
    with pytest.raises(InstanceTooLarge):
        service.enumerate_canonical_games(4, 1)


def test_exact_recovers_majority(inverse_service, banzhaf3):
    result = inverse_service.inverse_exact(_instance((1, 1, 1), banzhaf3))
    assert result.status == 'found'
    assert result.weights == (THIRD, THIRD, THIRD)
    assert result.games_examined > 0


def test_exact_recovers_dictator(inverse_service, shapley3):
    result = inverse_service.inverse_exact(_instance((2, 0, 0), shapley3))
    assert result.status == 'found'
    assert result.weights == (1, 0, 0)


def test_two_dictators_cannot_coexist(inverse_service, banzhaf3):
    result = inverse_service.inverse_exact(_instance((2, 2, 2), banzhaf3))
    assert result.status == 'no_solution_in_class'
    assert result.weights is None


def test_found_results_verify(inverse_service, semivalue_service, rng):
    for _ in range(10):
        n = rng.randint(1, 4)
        p = random_probability_vector(n, rng)
        game = make_game([rng.randint(0, 2) for _ in range(n)], rng.randint(-n, n))
        targets = semivalue_service.semivalues_bruteforce(game, p).values
        result = inverse_service.inverse_exact(_instance(targets, p, game.theta))
        if result.status == 'found':
            assert sum(result.weights) == 1
            assert semivalue_service.verify_semivalues(result.game, p, targets)


def test_nearest_exact_match(inverse_service, banzhaf3):
    result = inverse_service.inverse_nearest(_instance((1, 1, 1), banzhaf3))
    assert result.status == 'nearest'
    assert result.distance == 0
    assert result.weights == (THIRD, THIRD, THIRD)


@pytest.mark.parametrize("norm, expected", [('l1', Fraction(1, 10)), ('l2', Fraction(1, 100))])
def test_nearest_to_perturbed_majority(inverse_service, banzhaf3, norm, expected):
    result = inverse_service.inverse_nearest(_instance((1, 1, Fraction(9, 10)), banzhaf3), norm=norm)
    assert result.distance == expected
    assert result.weights == (THIRD, THIRD, THIRD)


def test_nearest_is_monotone_in_bound(inverse_service, banzhaf3):
    inst = _instance((Fraction(3, 2), Fraction(1, 2), Fraction(1, 2)), banzhaf3)
    coarse = inverse_service.inverse_nearest(inst, bound=1)
    fine = inverse_service.inverse_nearest(inst, bound=2)
    assert fine.distance <= coarse.distance


def test_distance_rejects_unknown_norm():
    with pytest.raises(PreconditionViolated):
        distance((1,), (0,), 'linf')


def test_heuristic_starts_at_majority(inverse_service):
    result = inverse_service.iterative_banzhaf_heuristic((1, 1, 1))
    assert result.status == 'found'
    assert result.iterations == 0
    assert result.weights == (THIRD, THIRD, THIRD)


def test_heuristic_reaches_dictator(inverse_service):
    result = inverse_service.iterative_banzhaf_heuristic((2, 0, 0), iterations=10)
    assert result.status == 'found'
    assert result.distance == 0
    assert result.weights[0] > result.weights[1] + result.weights[2]


def test_heuristic_never_worse_than_start(inverse_service):
    targets = (Fraction(3, 2), Fraction(1, 2), 0)
    start = inverse_service.iterative_banzhaf_heuristic(targets, iterations=0)
    result = inverse_service.iterative_banzhaf_heuristic(targets, iterations=8, step=Fraction(1, 2))
    assert result.distance <= start.distance


def test_heuristic_input_checks(inverse_service):
    with pytest.raises(PreconditionViolated):
        inverse_service.iterative_banzhaf_heuristic((1, -1, 1))
    with pytest.raises(ZeroSemivalueEncountered):
        inverse_service.iterative_banzhaf_heuristic((1, 1), iterations=3, theta=5)


def test_uniqueness_same_function(inverse_service, banzhaf3):
    f = make_game(['2/5', '3/10', '3/10'])
    g = make_game(['1/3', '1/3', '1/3'])
    report = inverse_service.uniqueness_check(f, g, banzhaf3)
    assert report.hypothesis_met
    assert report.ok
    assert report.points_checked == 8


def test_uniqueness_hypothesis_not_met(inverse_service, banzhaf3):
    report = inverse_service.uniqueness_check(make_game([1, 0, 0]), make_game(['1/3', '1/3', '1/3']), banzhaf3)
    assert not report.hypothesis_met
    assert report.message == "hypothesis not met"


def test_uniqueness_needs_equal_sums(inverse_service, banzhaf3):
    with pytest.raises(PreconditionViolated):
        inverse_service.uniqueness_check(make_game([1, 1, 1]), make_game([1, 0, 0]), banzhaf3)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_equal_semivalues_mean_equal_functions(inverse_service, seed):
    r = random.Random(seed)
    for n in range(1, 6):
        result = inverse_service.equal_semivalue_search(n, 2, random_probability_vector(n, r, reasonable=False))
        assert result.counterexamples == 0


def test_equal_semivalue_search_size(inverse_service, banzhaf3):
    result = inverse_service.equal_semivalue_search(3, 2, banzhaf3)
    assert result.games == 27 * 13
    assert result.counterexamples == 0


def test_verification_via_inverse(inverse_service, banzhaf3):
    assert inverse_service.verification_via_inverse([1, 1, 1], 0, [1, 1, 1], banzhaf3)
    assert not inverse_service.verification_via_inverse([1, 1, 1], 0, [1, 1, 0], banzhaf3)


def test_verification_via_inverse_uses_the_given_oracle(inverse_service, banzhaf3):
    def never(instance):
        return InverseResult(status='no_solution_in_class', weights=None, theta=instance.theta)

    assert not inverse_service.verification_via_inverse([1, 1, 1], 0, [1, 1, 1], banzhaf3, inverse=never)


@settings(max_examples=60, deadline=None)
@given(weights=st.lists(st.integers(0, 2), min_size=1, max_size=4), data=st.data())
def test_verification_paths_agree(weights, data):
    if not any(weights):
        weights = [1] + weights[1:]
    n = len(weights)
    theta = data.draw(st.integers(-n, n))
    p = random_probability_vector(n, random.Random(data.draw(st.integers(0, 10 ** 6))))
    semivalues = SemivalueService(cap=12)
    inverse = InverseService(semivalues, bound=2)
    game = make_game(weights, theta)
    targets = list(semivalues.semivalues_bruteforce(game, p).values)
    if data.draw(st.booleans()):
        targets[data.draw(st.integers(0, n - 1))] += Fraction(1, 3)
    assert inverse.verification_via_inverse(weights, theta, targets, p) == \
        semivalues.verify_semivalues(game, p, targets)
