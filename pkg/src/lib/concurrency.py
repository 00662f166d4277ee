"""Deterministic thread-pool mapping for independent numerical tasks."""

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from src.lib.config import settings
from src.lib.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """
    Apply fn to every item, possibly on a thread pool.

    Results always come back in input order, whatever order the workers finish in.

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Worker count (default: settings.threads); 1 runs inline

    Returns:
        List of results aligned with items
    """
    work = list(items)
    workers = threads if threads is not None else settings.threads

    if workers <= 1 or len(work) <= 1:
        return [fn(item) for item in work]

    logger.debug(f"Dispatching {len(work)} tasks to {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, work))
