"""Deterministic random sub-streams.

Every stochastic routine takes a single integer seed (or a
``SeedSequence``) and derives an independent child stream per logical
unit of work, keyed by integers such as ``(position, trial)``.  Because
the child depends only on the root seed and its key, the result never
depends on the order in which units are evaluated.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

SeedLike = "int | np.random.SeedSequence"


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        if seed < 0:
            raise ValidationError("seed must be non-negative")
        return np.random.SeedSequence(int(seed))
    raise ValidationError(f"expected an integer seed or SeedSequence, got {type(seed).__name__}")


def child_seed(seed, *key: int) -> np.random.SeedSequence:
    root = as_seed_sequence(seed)
    return np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + tuple(int(k) for k in key))


def substream(seed, *key: int) -> np.random.Generator:
    """Generator for the child stream of ``seed`` addressed by ``key``."""
    return np.random.Generator(np.random.PCG64(child_seed(seed, *key)))
