"""Seed-derived random streams.

Every stochastic routine in the package draws from a generator keyed by
(master seed, stream index) so results are independent of the order in
which series or surrogate sets are processed.
"""
import numpy as np


def substream(seed, index):
    """Return an RNG for stream `index` derived from `seed`.

    The mapping is injective in (seed, index), so parallel workers
    processing streams in any order reproduce the sequential result.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))
