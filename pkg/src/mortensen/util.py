"""Numeric and infrastructure helpers.

Reductions over Monte Carlo ensembles use a canonical summation order
(sort, then numpy's pairwise sum) so that results are bit-identical under
any permutation of the inputs and any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "MORTENSEN_THREADS"


def canonical_sum(values) -> float:
    """Permutation-invariant sum: sort ascending, then pairwise-sum."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    return float(np.sum(np.sort(arr)))


def canonical_dot(a, b) -> float:
    """Permutation-invariant sum of elementwise products."""
    prod = np.asarray(a, dtype=np.float64).ravel() * np.asarray(b, dtype=np.float64).ravel()
    return float(np.sum(np.sort(prod)))


def logsumexp_canonical(log_values) -> float:
    """log(sum(exp(x))) with max-shift and canonical summation order."""
    arr = np.asarray(log_values, dtype=np.float64).ravel()
    if arr.size == 0:
        return -np.inf
    m = float(np.max(arr))
    if not np.isfinite(m):
        return m
    return m + float(np.log(canonical_sum(np.exp(arr - m))))


def worker_count() -> int:
    """Worker cap from the MORTENSEN_THREADS environment variable (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order.

    Uses a thread pool when MORTENSEN_THREADS > 1.  Each task must be pure
    given its inputs; outputs are assembled by input index, so results are
    identical for any worker count.
    """
    items = list(items)
    n_workers = worker_count()
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


def fmt_float(x) -> str:
    """Decimal text with 17 significant digits (round-trips float64)."""
    return format(float(x), ".17g")
