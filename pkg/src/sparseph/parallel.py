"""Thread-pool helpers with order-stable aggregation.

Work is always split into units indexed 0..n-1 whose random streams depend
only on the unit index, and results are reduced in index order.  Thread
count therefore affects scheduling only, never numeric output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

__all__ = ["default_threads", "map_indexed"]

THREADS_ENV = "SPARSE_PH_THREADS"


def default_threads() -> int:
    """Thread count from SPARSE_PH_THREADS, defaulting to 1."""
    raw = os.environ.get(THREADS_ENV, "")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def map_indexed(fn: Callable[[int], T], count: int, threads: int | None = None) -> list[T]:
    """Evaluate [fn(0), ..., fn(count-1)], possibly concurrently.

    Results are returned in index order regardless of completion order.
    """
    if threads is None:
        threads = default_threads()
    if count == 0:
        return []
    if threads <= 1 or count == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        return list(pool.map(fn, range(count)))
