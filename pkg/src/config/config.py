import os
from fractions import Fraction
from typing import Any, Dict

from dotenv import load_dotenv

from src.utils.error_utils import ParseError
from src.utils.logging_utils import get_logger
from src.utils.rational_utils import parse_rational

logger = get_logger(__name__)


def _env_fraction(name: str, default: str) -> Fraction:
    try:
        return parse_rational(os.getenv(name, default))
    except ParseError as e:
        raise ParseError(f"{name}: {e.message}", {"variable": name}) from e


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name, default).strip()
    try:
        return int(raw)
    except ValueError as e:
        raise ParseError(f"{name} must be an integer, got {raw!r}", {"variable": name}) from e


class SemivalueConfig:
    """Configuration for the semivalue toolkit"""

    def __init__(self, load_env_file: bool = True):
        """Initialize configuration from environment variables"""
        if load_env_file:
            load_dotenv(override=False)

        # Enumeration limits
        self.cap = _env_int('SVF_CAP', '20')
        self.dp_weight_limit = _env_int('SVF_DP_WEIGHT_LIMIT', '1000000')
        self.vertex_bound = _env_int('SVF_VERTEX_BOUND', '3')
        self.vertex_max_players = _env_int('SVF_VERTEX_MAX_PLAYERS', '8')
        self.inverse_bound = _env_int('SVF_INVERSE_BOUND', '2')
        self.inverse_max_players = _env_int('SVF_INVERSE_MAX_PLAYERS', '8')

        # Reasonable-vector fractions
        self.reasonable_alpha = _env_fraction('SVF_REASONABLE_ALPHA', '1/4')
        self.reasonable_beta = _env_fraction('SVF_REASONABLE_BETA', '1/4')

        # Reduction chain
        self.promise_b1 = _env_fraction('SVF_PROMISE_B1', '1/4')
        self.promise_b2 = _env_fraction('SVF_PROMISE_B2', '3/4')
        self.khintchine_y = _env_fraction('SVF_Y', '1/4')

        # Execution
        self.jobs = _env_int('SVF_JOBS', '1')
        self.seed = _env_int('SVF_SEED', '20240101')
        self.log_level = os.getenv('LOG_LEVEL', 'WARNING')

    def validate(self) -> bool:
        """Validate the configuration"""
        problems = []
        for name in ('cap', 'dp_weight_limit', 'vertex_bound', 'vertex_max_players',
                     'inverse_bound', 'inverse_max_players', 'jobs'):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive")

        if not (0 < self.reasonable_alpha and 0 < self.reasonable_beta
                and self.reasonable_alpha + self.reasonable_beta < 1):
            problems.append("reasonable fractions need 0 < alpha, beta and alpha + beta < 1")
        if not (0 < self.promise_b1 <= self.promise_b2 < 1):
            problems.append("promise window needs 0 < b1 <= b2 < 1")
        if not (0 < self.khintchine_y < Fraction(1, 2)):
            problems.append("y must lie strictly between 0 and 1/2")

        if problems:
            logger.logjson("ERROR", "Configuration validation failed", {"problems": problems})
            return False
        return True

    def as_dict(self) -> Dict[str, Any]:
        return {
            'cap': self.cap,
            'dp_weight_limit': self.dp_weight_limit,
            'vertex_bound': self.vertex_bound,
            'vertex_max_players': self.vertex_max_players,
            'inverse_bound': self.inverse_bound,
            'inverse_max_players': self.inverse_max_players,
            'reasonable_alpha': str(self.reasonable_alpha),
            'reasonable_beta': str(self.reasonable_beta),
            'promise_b1': str(self.promise_b1),
            'promise_b2': str(self.promise_b2),
            'y': str(self.khintchine_y),
            'jobs': self.jobs,
            'seed': self.seed,
        }
