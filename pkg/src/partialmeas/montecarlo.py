"""Seeded random streams for reproducible Monte Carlo.

Trials are partitioned into fixed-size chunks by trial index. Chunk ``k``
always draws from ``SeedSequence(seed, spawn_key=(k,))`` regardless of how
many workers process the chunks, so aggregated results do not depend on the
degree of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, TypeVar

import numpy as np

CHUNK_SIZE = 1 << 18

T = TypeVar("T")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for chunk ``index`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def chunks(trials: int, chunk_size: int = CHUNK_SIZE) -> Iterator[tuple[int, int]]:
    """Yield ``(chunk_index, n_trials_in_chunk)`` covering ``trials``."""
    for k, start in enumerate(range(0, trials, chunk_size)):
        yield k, min(chunk_size, trials - start)


def map_chunks(
    fn: Callable[[np.random.Generator, int], T],
    seed: int,
    trials: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> list[T]:
    """Apply ``fn(rng, n)`` to every chunk; results come back in chunk order."""
    jobs = list(chunks(trials, chunk_size))

    def run(job):
        k, n = job
        return fn(chunk_rng(seed, k), n)

    if workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
