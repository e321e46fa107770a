"""
Thread-pool fan-out for independent simulation rows, restarts and grid points.

Results always come back in input order, so reductions downstream do not
depend on scheduling.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar('T')
R = TypeVar('R')

MAX_DEFAULT_WORKERS = 8


def worker_count(workers: Optional[int] = None) -> int:
    """Resolve the pool width from the argument, FLOQUET_WORKERS, or CPU count"""
    if workers is not None:
        return max(int(workers), 1)
    env_value = os.getenv('FLOQUET_WORKERS')
    if env_value:
        try:
            return max(int(env_value), 1)
        except ValueError:
            pass
    return min(os.cpu_count() or 1, MAX_DEFAULT_WORKERS)


def parallel_map(fn: Callable[[T], R], items: Iterable[T],
                 workers: Optional[int] = None) -> List[R]:
    items = list(items)
    count = min(worker_count(workers), len(items))
    if count <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as executor:
        return list(executor.map(fn, items))
