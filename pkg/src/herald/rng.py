"""Seed-stable random streams.

Everything that needs reproducible randomness draws from SplitMix64, a
named 64-bit generator with a published reference sequence, so identical
seeds give identical streams on every platform and Python build.
Gaussian variates come from the Box-Muller transform over that stream.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance SplitMix64 once; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def hash64(data: bytes, seed: int = 0) -> int:
    """Stable 64-bit hash of a byte string (FNV-1a folded through SplitMix64)."""
    h = (0xCBF29CE484222325 ^ (seed & _MASK)) & _MASK
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    _, out = splitmix64(h)
    return out


class Stream:
    """A deterministic uniform/Gaussian stream seeded by a 64-bit value."""

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._spare: float | None = None

    def next_u64(self) -> int:
        self._state, out = splitmix64(self._state)
        return out

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Uniform draw in [low, high)."""
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return low + (high - low) * u

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Standard Box-Muller; consumes two uniforms per pair of outputs."""
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return mu + sigma * z
        # u1 in (0, 1] so log(u1) is finite.
        u1 = (self.next_u64() + 1) * 2.0 ** -64
        u2 = (self.next_u64() >> 11) * 2.0 ** -53
        radius = math.sqrt(-2.0 * math.log(u1))
        z0 = radius * math.cos(2.0 * math.pi * u2)
        self._spare = radius * math.sin(2.0 * math.pi * u2)
        return mu + sigma * z0

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK - (_MASK % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def substream(seed: int, *labels: object) -> Stream:
    """Derive an independent stream from a seed and a label path.

    Labels are folded into the state one by one, so ``substream(s, "a", 1)``
    and ``substream(s, "a", 2)`` are decorrelated.
    """
    state = seed & _MASK
    for label in labels:
        state = hash64(repr(label).encode("utf-8"), seed=state)
    return Stream(state)
