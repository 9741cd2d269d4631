import threading
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator

from ..utils.logging_utils import get_logger

logger = get_logger(__name__)


class MetricsService:
    """Counters and wall-clock timings collected while a command runs"""

    def __init__(self):
        self.metrics: Dict[str, Any] = {
            'assignments_enumerated': 0,
            'games_examined': 0,
            'dp_tables_built': 0,
            'timings_ms': {},
        }
        self._lock = threading.Lock()

    def increment_metric(self, metric_name: str, value: int = 1):
        """Increment a metric counter"""
        with self._lock:
            self.metrics[metric_name] = self.metrics.get(metric_name, 0) + value

    def record_timing(self, name: str, elapsed_ms: float):
        with self._lock:
            timings = self.metrics['timings_ms']
            timings[name] = timings.get(name, 0.0) + elapsed_ms

    @contextmanager
    def timer(self, name: str) -> Iterator[None]:
        """Accumulate the elapsed time of the block under ``name``"""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.record_timing(name, (time.perf_counter() - start) * 1000.0)

    def get_metrics(self) -> Dict[str, Any]:
        """Get a copy of the current metrics"""
        with self._lock:
            snapshot = dict(self.metrics)
            snapshot['timings_ms'] = dict(self.metrics['timings_ms'])
            return snapshot

    def log_metrics(self, message: str = "Run metrics"):
        logger.logjson("INFO", message, self.get_metrics())

    def reset(self):
        with self._lock:
            for key in list(self.metrics):
                self.metrics[key] = {} if key == 'timings_ms' else 0
