"""Seed splitting for replicate-level reproducibility.

Replicate ``i`` of a run with master seed ``s`` draws from a Philox4x64
generator keyed by ``s`` whose counter starts at ``(0, 0, 0, i)``.  Draws
within a replicate only advance the low counter words, so replicate
streams never overlap, and any subset of replicates can be regenerated
independently, in any order, on any platform.
"""

import numpy as np


def replicate_stream(seed, index):
    """Generator for replicate ``index`` under master ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and replicate index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(index)]))


def normal_block(seed, start, stop, dim):
    """Standard normal draws for replicates ``start .. stop-1``, one row each."""
    out = np.empty((stop - start, dim))
    for row, i in enumerate(range(start, stop)):
        out[row] = replicate_stream(seed, i).standard_normal(dim)
    return out


def chunks(total, size):
    for start in range(0, total, size):
        yield start, min(total, start + size)
