"""Thread-count resolution and an order-preserving map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "DIGITFRAC_THREADS"


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(threads)
    except (TypeError, ValueError):
        raise ValueError(f"bad thread count {threads!r}") from None
    return max(1, n)


def ordered_map(fn, items, threads=None) -> list:
    """``[fn(x) for x in items]``, possibly on a thread pool; result order is fixed."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))
