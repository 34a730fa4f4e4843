"""Worker-pool helpers honoring the KINODYN_THREADS environment variable."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_ENV_VAR = "KINODYN_THREADS"


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get(_ENV_VAR)
    if cap is not None:
        try:
            limit = max(1, int(cap))
        except ValueError:
            limit = 1
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_tasks))


def parallel_map(fn, items):
    """Map ``fn`` over ``items``, threading only when allowed and useful."""
    items = list(items)
    workers = worker_count(len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
