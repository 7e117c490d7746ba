"""Order-preserving process pool; results never depend on the worker count."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_WORKERS = "FRACTALZETA_WORKERS"


def worker_count(flag=None) -> int:
    """Flag value if given, else the environment variable, else 1."""
    if flag is not None:
        n = int(flag)
    else:
        raw = os.environ.get(ENV_WORKERS, "").strip()
        n = int(raw) if raw else 1
    if n < 1:
        raise ValueError("worker count must be at least 1")
    return n


def pmap(fn, items, workers: int = 1) -> list:
    """map(fn, items) in input order; fn must be picklable for workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
