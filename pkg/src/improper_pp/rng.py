"""Seeded random streams.

Stream-splitting rule: replicate ``i`` under master seed ``s`` draws from
``Generator(PCG64(SeedSequence(s, spawn_key=(i,))))``.  This is the same
stream ``SeedSequence(s).spawn(i + 1)[i]`` would give, so replicate streams
are independent of each other and of the order in which they are created.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed) -> np.random.Generator:
    """Return a private generator for ``seed`` (an int, or a Generator passed through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def streams(seed: int, count: int, start: int = 0):
    for i in range(start, start + count):
        yield stream(seed, i)
