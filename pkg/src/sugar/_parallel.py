"""Row-blocked matrix helpers with a capped worker pool.

Heavy products are computed in fixed-size row blocks.  Each block is a
self-contained numpy call, so the result is bitwise identical no matter
how many workers the pool uses; SUGAR_THREADS only changes scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Fixed block size: results must not depend on the worker count, so the
# work partition must not either.
BLOCK_ROWS = 512


def worker_count() -> int:
    """Worker cap from SUGAR_THREADS (default: all CPUs)."""
    env = os.environ.get("SUGAR_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as err:
            raise ValueError(f"SUGAR_THREADS must be an integer, got {env!r}") from err
        if n < 1:
            raise ValueError(f"SUGAR_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _row_blocks(n: int):
    return [(lo, min(lo + BLOCK_ROWS, n)) for lo in range(0, n, BLOCK_ROWS)]


def map_row_blocks(fn, n: int, out: np.ndarray) -> np.ndarray:
    """Fill ``out[lo:hi]`` with ``fn(lo, hi)`` for each fixed row block."""
    blocks = _row_blocks(n)
    workers = min(worker_count(), len(blocks))
    if workers <= 1 or len(blocks) == 1:
        for lo, hi in blocks:
            out[lo:hi] = fn(lo, hi)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(lo, hi, pool.submit(fn, lo, hi)) for lo, hi in blocks]
        for lo, hi, fut in futures:
            out[lo:hi] = fut.result()
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b`` computed block-row-wise (deterministic across pool sizes)."""
    a = np.ascontiguousarray(a)
    out = np.empty((a.shape[0], b.shape[1]), dtype=np.result_type(a, b))
    return map_row_blocks(lambda lo, hi: a[lo:hi] @ b, a.shape[0], out)
