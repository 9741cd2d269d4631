import random
from fractions import Fraction

import pytest

from src.services.game_model import make_game, preset_probability_vector, random_probability_vector
from src.services.inverse_service import InverseService
from src.services.khintchine_service import KhintchineService
from src.services.metrics_service import MetricsService
from src.services.reduction_service import ReductionService
from src.services.semivalue_service import SemivalueService


@pytest.fixture
def maj3():
    return make_game([1, 1, 1])


@pytest.fixture
def banzhaf3():
    return preset_probability_vector('banzhaf', 3)


@pytest.fixture
def shapley3():
    return preset_probability_vector('shapley', 3)


@pytest.fixture
def rng():
    return random.Random(20240101)


@pytest.fixture
def random_p(rng):
    def draw(n):
        return random_probability_vector(n, rng, reasonable=True)
    return draw


@pytest.fixture
def metrics():
    return MetricsService()


@pytest.fixture
def semivalue_service(metrics):
    return SemivalueService(cap=12, dp_weight_limit=1_000_000, jobs=1, metrics=metrics)


@pytest.fixture
def khintchine_service(metrics):
    return KhintchineService(cap=12, metrics=metrics)


@pytest.fixture
def reduction_service(semivalue_service, khintchine_service):
    return ReductionService(semivalue_service, khintchine_service, cap=12, vertex_bound=3,
                            vertex_max_players=8, promise_b1=Fraction(1, 4), promise_b2=Fraction(3, 4),
                            y=Fraction(1, 4))


@pytest.fixture
def inverse_service(semivalue_service):
    return InverseService(semivalue_service, cap=12, bound=2, max_players=8)
