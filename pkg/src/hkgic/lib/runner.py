import logging
import os
from collections.abc import Callable
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

from .config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = get_settings().grid_workers
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def run_grid(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """
    Evaluate fn over the split grid.

    Results always come back in input order, so any fold over them is
    deterministic no matter how many worker processes ran.
    """
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunksize = max(1, len(items) // (workers * 4))
    logger.info(f"evaluating {len(items)} grid points on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
