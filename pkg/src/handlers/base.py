"""
Base task handler.

Provides the shared grid and unit helpers used by every task handler.
"""

import math
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi


class BaseTaskHandler:
    """Base class for task handlers with shared utilities"""

    def __init__(self, workers: Optional[int] = None):
        """
        Initialize base handler with shared settings.

        Args:
            workers: thread pool width for row, restart and grid parallelism;
                None defers to FLOQUET_WORKERS
        """
        self.workers = workers

    def resolve_workers(self, cfg) -> Optional[int]:
        """The config's worker count wins over the application default"""
        return cfg.workers if cfg.workers is not None else self.workers

    @staticmethod
    def grid(start: float, stop: float, points: int) -> np.ndarray:
        return np.linspace(start, stop, points)

    @staticmethod
    def to_hz(value):
        """rad/s back to ordinary frequency for export"""
        return np.asarray(value) / TWO_PI if np.ndim(value) else value / TWO_PI
