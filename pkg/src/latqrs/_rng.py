"""Seeded random streams.

Every command derives its generators from one integer seed through
``SeedSequence`` spawning, using the counter-based Philox bit generator.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed) -> np.random.Generator:
    """``Generator(Philox)`` from an int seed, a SeedSequence, or pass-through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn(seed, count: int) -> list[np.random.Generator]:
    """``count`` independent child generators of ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in ss.spawn(count)]
