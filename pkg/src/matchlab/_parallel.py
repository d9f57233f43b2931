"""Deterministic fan-out helper.

Work is split into index-ordered jobs and merged in job order, so results
never depend on the worker count.  ``workers <= 1`` stays in-process.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    env = os.environ.get("MATCHLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def map_chunks(fn: Callable[[T], R], jobs: Sequence[T], workers: int) -> list[R]:
    """Apply ``fn`` to every job, in order.  ``fn`` must be a module-level
    function when workers > 1 (jobs cross a process boundary)."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))
