"""
Counter-based random streams and binomial sampling by inversion

Replicate i always draws from block i // block_size of its stream, and a
block is a Philox generator keyed by (seed, stream) whose counter starts at
the block index. Results therefore depend only on (seed, replicate index),
never on how blocks are scheduled across workers.
"""
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, List

import numpy as np
from scipy.stats import binom

from core.config import CHUNK_SIZE

# Stream ids; each simulated quantity gets its own
STREAM_OBSERVED = 0
STREAM_MISSING = 1
STREAM_CONDITIONAL = 2


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """Philox generator for one block of one stream"""
    key = (stream << 64) | seed
    counter = block << 192
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def block_uniforms(seed: int, stream: int, block: int, size: int) -> np.ndarray:
    """size uniforms on (0, 1] for one block"""
    return 1.0 - block_generator(seed, stream, block).random(size)


class BinomialInverter:
    """Binomial(trials, p) quantile function on a precomputed CDF table"""

    def __init__(self, trials: int, p: float):
        self.trials = int(trials)
        self.p = float(p)
        if self.trials > 0:
            cdf = np.cumsum(binom.pmf(np.arange(self.trials + 1), self.trials, self.p))
            cdf /= cdf[-1]
            cdf[-1] = 1.0
            cdf.setflags(write=False)
            self.cdf = cdf
        else:
            self.cdf = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        """Smallest k with F(k) >= u"""
        if self.cdf is None:
            return np.zeros(len(u), dtype=np.int64)
        return np.searchsorted(self.cdf, u, side="left").astype(np.int64)


@lru_cache(maxsize=64)
def inverter(trials: int, p: float) -> BinomialInverter:
    return BinomialInverter(trials, p)


def block_layout(replicates: int, block_size: int = CHUNK_SIZE) -> List[int]:
    """Sizes of consecutive blocks covering replicates"""
    full, rest = divmod(replicates, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(replicates: int, fn: Callable[[int, int], np.ndarray], workers: int = 1,
               block_size: int = CHUNK_SIZE) -> np.ndarray:
    """
    Evaluate fn(block, size) for every block and concatenate in block order.

    fn must be a pure function of its arguments.
    """
    sizes = block_layout(replicates, block_size)
    if workers <= 1 or len(sizes) == 1:
        parts = [fn(block, size) for block, size in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, range(len(sizes)), sizes))
    return np.concatenate(parts)
