"""Worker-count control and order-preserving chunked maps.

Chunk boundaries never depend on the worker count, so reductions over the
chunk results are bit-identical for any ``MORREY_THREADS``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get("MORREY_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"MORREY_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(n: int, size: int) -> list[tuple[int, int]]:
    return [(a, min(a + size, n)) for a in range(0, n, size)]
