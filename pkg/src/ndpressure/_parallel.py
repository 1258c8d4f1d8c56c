"""Deterministic worker-pool map.

Results are assembled by input index, so the output is identical for any
worker count. Workers default to the NDPRESSURE_WORKERS environment variable.
"""

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "pmap"]

_ENV_VAR = "NDPRESSURE_WORKERS"


def worker_count():
    raw = os.environ.get(_ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, n)


def pmap(fn, items, workers=None):
    items = list(items)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
