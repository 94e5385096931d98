"""Deterministic per-replication random streams.

Every replication owns a private ``random.Random`` seeded by a 64-bit
avalanche mix of ``(base_seed, rep_index)``, so streams are independent of
each other and of the order in which replications execute.
"""

from __future__ import annotations

import random

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 avalanche round (Steele et al. finalizer)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def rep_seed(base_seed: int, rep_index: int) -> int:
    """64-bit seed for replication ``rep_index`` under ``base_seed``."""
    if rep_index < 0:
        raise ValueError("rep_index must be nonnegative")
    return splitmix64(splitmix64(base_seed & _MASK64) ^ (rep_index + 1))


def make_rng(base_seed: int, rep_index: int) -> random.Random:
    """Independent, reproducible stream for one replication."""
    return random.Random(rep_seed(base_seed, rep_index))
