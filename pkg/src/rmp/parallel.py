"""Deterministic chunked execution.

Work is split into fixed-size chunks that are independent of the worker
count; results are merged in chunk order, so one thread and many
threads produce bit-identical output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def chunk_sizes(total: int, chunk: int):
    """Sizes of consecutive chunks covering ``total`` items."""
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def map_chunks(fn, n_chunks: int, threads: int = 1):
    """Apply fn(0..n_chunks-1), returning results in chunk order."""
    if threads <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=min(threads, n_chunks)) as ex:
        return list(ex.map(fn, range(n_chunks)))
