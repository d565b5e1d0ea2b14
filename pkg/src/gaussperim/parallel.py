"""Ordered parallel map. Results never depend on the worker count."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_threads: int | None = None


def set_threads(n: int | None) -> None:
    global _threads
    if n is not None and n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = n


def threads() -> int:
    if _threads is not None:
        return _threads
    env = os.environ.get("GAUSSPERIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def ordered_map(fn, items):
    """``[fn(i) for i in items]``, possibly on threads; output order is input order."""
    items = list(items)
    k = min(threads(), len(items))
    if k <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))
