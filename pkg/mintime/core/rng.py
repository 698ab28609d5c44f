from __future__ import annotations

import math

import numpy as np

from .types import Vector

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Seeded 64-bit generator shared by every sampling routine.

    state += 0x9E3779B97F4A7C15, then the output mix
    z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9; z = (z ^ z >> 27) * 0x94D049BB133111EB;
    z ^ z >> 31. Uniform doubles use the top 53 bits.
    """

    def __init__(self, seed: int = 0) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN_GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.uniform() * n) % n

    def in_box(self, lower: Vector, upper: Vector) -> Vector:
        return np.array([self.uniform(lo, hi) for lo, hi in zip(lower, upper)])

    def normal(self) -> float:
        # Box-Muller, one draw per call.
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def direction(self, dim: int) -> Vector:
        while True:
            vec = np.array([self.normal() for _ in range(dim)])
            norm = float(np.linalg.norm(vec))
            if norm > 1e-12:
                return vec / norm

    def in_ball(self, dim: int, radius: float = 1.0) -> Vector:
        """Uniform point of the open ball B(0, radius)."""

        direction = self.direction(dim)
        scale = self.uniform() ** (1.0 / dim)
        return radius * scale * direction * (1.0 - 1e-12)

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices out of range(n), in draw order (partial Fisher-Yates)."""

        k = min(k, n)
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
