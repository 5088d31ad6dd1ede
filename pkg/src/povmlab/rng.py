"""Counter-based random streams.

Every Monte Carlo routine consumes randomness in fixed-size chunks. Chunk ``i``
of seed ``s`` draws from a Philox generator keyed by ``(s, i)``, so results
depend only on ``(seed, count)`` and never on how chunks are scheduled.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16
_U64 = (1 << 64) - 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) <= _U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return int(seed)


def stream(seed, index=0):
    """Generator for substream ``index`` of ``seed``."""
    return np.random.Generator(np.random.Philox(key=check_seed(seed) | (int(index) << 64)))


def chunks(count, chunk=CHUNK):
    return [(i, lo, min(lo + chunk, count)) for i, lo in enumerate(range(0, count, chunk))]


def map_chunks(fn, seed, count, workers=1, chunk=CHUNK):
    """Apply ``fn(rng, lo, hi)`` to every chunk; results come back in chunk order."""
    seed = check_seed(seed)
    jobs = chunks(count, chunk)

    def run(job):
        i, lo, hi = job
        return fn(stream(seed, i), lo, hi)

    if workers <= 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
