"""
Seeded random streams and the worker pool.

Stream derivation rule: every stream is a child of the user's 64-bit seed,
SeedSequence(seed, spawn_key=(purpose, index)), feeding a counter-based Philox
generator. Draw block k of a simulated p-value uses (DRAW_STREAM, k); replication
r of an experiment derives its own seed from (REPLICATION_STREAM, r). Results never
depend on how blocks or replications are scheduled across threads.
"""
from concurrent.futures import ThreadPoolExecutor
import logging
import os
from typing import Callable, Iterable, List, Optional, TypeVar
import numpy as np
from parsimax.exc import ConfigError


DRAW_STREAM = 0
REPLICATION_STREAM = 1
DATA_STREAM = 2
POPULATION_STREAM = 3

DRAW_BLOCK = 8192
WORKERS_ENV = 'PARSIMAX_WORKERS'
SEED_MAX = 2 ** 64 - 1

T = TypeVar('T')
R = TypeVar('R')


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) <= SEED_MAX:
        raise ConfigError(f'seed must be a 64-bit unsigned integer, got {seed}')
    return int(seed)


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=(purpose, index))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, purpose: int, index: int) -> int:
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=(purpose, index))
    return int(sequence.generate_state(1, np.uint64)[0])


def block_sizes(total: int, block: int = DRAW_BLOCK) -> List[int]:
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def worker_count(requested: Optional[int] = None) -> int:
    """Explicit request, else PARSIMAX_WORKERS, else the CPU count"""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f'{WORKERS_ENV} must be an integer, got {env!r}')
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1) -> List[R]:
    """map() over a thread pool; results keep input order whatever the schedule"""
    items = list(items)
    workers = worker_count(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logging.debug(f'Running {len(items)} tasks on {workers} threads')
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
