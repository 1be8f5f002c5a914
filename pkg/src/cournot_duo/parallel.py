"""Deterministic data-parallel helpers.

Work is split into contiguous index chunks whose results are reassembled in
index order, so outputs never depend on the thread count.  Numba kernels
release the GIL, which is what makes threads worthwhile here.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "COURNOT_THREADS"


def resolve_threads(threads=None) -> int:
    """Explicit ``threads`` wins; otherwise all cores capped by
    ``COURNOT_THREADS``."""
    if threads is not None:
        if int(threads) < 1:
            raise ValueError("threads must be positive")
        return int(threads)
    n = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def chunk_bounds(n: int, n_chunks: int):
    edges = np.linspace(0, n, max(1, min(n_chunks, n)) + 1).astype(int)
    return list(zip(edges[:-1], edges[1:]))


def map_rows(fn, X: np.ndarray, threads=None, min_chunk: int = 256):
    """Apply ``fn`` to row blocks of ``X`` and concatenate along axis 0."""
    n = X.shape[0]
    workers = resolve_threads(threads)
    n_chunks = min(workers, max(1, n // min_chunk))
    if n_chunks <= 1:
        return fn(X)
    bounds = chunk_bounds(n, n_chunks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda b: fn(X[b[0]:b[1]]), bounds))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p, axis=0) for p in zip(*parts))
    return np.concatenate(parts, axis=0)
