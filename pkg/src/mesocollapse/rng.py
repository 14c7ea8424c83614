"""Counter-based random streams.

Each (seed, stream tag, trajectory index) triple owns an independent
Philox stream, so a trajectory's noise does not depend on how work is split
across threads or on how many other trajectories are drawn.
"""

import numpy as np

TAG_CORRELATORS = 1
TAG_SDE = 2
TAG_KICKS = 3

_MASK64 = (1 << 64) - 1


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise TypeError("seed must be an integer")
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError("seed must lie in [0, 2**64)")


def stream(seed: int, tag: int, index: int) -> np.random.Generator:
    _check_seed(seed)
    key = int(seed) | ((int(tag) & 0xFFFF) << 112) | ((int(index) & ((1 << 48) - 1)) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def normal_block(seed: int, tag: int, start: int, count: int, n: int, scale: float = 1.0) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the (index, step) normal table."""
    out = np.empty((count, n))
    for r in range(count):
        out[r] = stream(seed, tag, start + r).standard_normal(n)
    if scale != 1.0:
        out *= scale
    return out
