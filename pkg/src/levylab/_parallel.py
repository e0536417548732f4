"""Seeded, chunked Monte Carlo streams.

Every batch of ``CHUNK`` consecutive samples draws from its own generator,
keyed by ``(seed, stream, chunk_index)``.  Results therefore do not depend on
how chunks are distributed over worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

CHUNK = 4096

T = TypeVar("T")


def thread_count() -> int:
    env = os.environ.get("LEVYLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def stream_key(name: str) -> int:
    # stable across processes, unlike hash()
    return int.from_bytes(name.encode("utf-8")[:8].ljust(8, b"\0"), "little")


def chunk_rng(seed: int, stream: str, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(stream_key(stream), int(chunk)))
    return np.random.default_rng(ss)


def chunk_sizes(m: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(m, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[int, int], T], m: int, chunk: int = CHUNK) -> list[T]:
    """Call ``fn(chunk_index, size)`` for each chunk of ``m`` samples, in order."""
    sizes = chunk_sizes(m, chunk)
    workers = min(thread_count(), len(sizes))
    if workers <= 1:
        return [fn(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))
