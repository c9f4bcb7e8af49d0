"""Reproducible random streams for Monte-Carlo ensembles.

Each run j of an ensemble draws from its own Philox counter-based stream
keyed by (seed, j), so results are bit-identical for a given seed no matter
how many runs execute or in what order.  Gaussian variates use the inverse
normal CDF applied to 53-bit uniforms centered away from {0, 1}; this
transform is frozen so streams never depend on library sampling internals.
"""

import numpy as np
from scipy.special import ndtri

_TWO53 = float(1 << 53)


def substream(seed, run_index):
    """Philox generator for run ``run_index`` of an ensemble with ``seed``."""
    seed = int(seed)
    run_index = int(run_index)
    if seed < 0 or run_index < 0:
        raise ValueError("seed and run index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=[seed, run_index]))


def standard_normals(gen, size):
    """Standard normal draws via inverse-CDF on open-interval uniforms."""
    u = (gen.integers(0, 1 << 53, size=size) + 0.5) / _TWO53
    return ndtri(u)


def run_normals(seed, run_index, size):
    """Convenience: ``size`` standard normals from the (seed, run) substream."""
    return standard_normals(substream(seed, run_index), size)
