"""Seed plumbing shared across the package.

All stochastic components take explicit 64-bit seeds. `mix64` is a
splitmix64-based combiner used to derive independent child seeds (oracle
runs, corpus entries, benchmark trials) from a base seed plus indices;
`PortableRng` exposes the same xorshift128+ stream the compiled planners
consume, so externally drawn samples match planner-internal ones.
"""

from __future__ import annotations

import numpy as np

from . import _kernels

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(*words: int) -> int:
    """Deterministically fold integers into one 64-bit seed (splitmix64 core)."""
    if not words:
        raise ValueError("mix64 needs at least one word")
    z = 0
    for w in words:
        z = (z + (w & MASK64) + _GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        z ^= z >> 31
    return z


class PortableRng:
    """xorshift128+ stream with splitmix64 seeding.

    Identical seeds give identical streams on every platform; doubles use
    the top 53 bits of each output word. This is the exact generator the
    planner kernels run internally.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed & MASK64
        self._state = _kernels.rng_state(np.uint64(self.seed))

    def uniform(self) -> float:
        """Next double in [0, 1)."""
        return float(_kernels.rng_uniform(self._state))

    def state_array(self):
        """Mutable uint64[2] state, shared with kernel-side draws."""
        return self._state
