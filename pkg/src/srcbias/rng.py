"""Seedable 64-bit PRNG: xoshiro256** with its state filled by splitmix64.

Every random draw in the toolkit goes through :class:`Xoshiro256` so results
are reproducible across platforms and numpy versions.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def derive_seed(seed: int, *path: object) -> int:
    """Derive an independent 64-bit seed from ``seed`` and a name path.

    The derivation is ``sha256("<seed>/<p1>/<p2>...")`` truncated to its first
    8 bytes (big endian), so distinct names never share a stream.
    """
    key = "/".join([str(int(seed) & MASK64), *map(str, path)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


class Xoshiro256:
    """xoshiro256** generator.

    >>> Xoshiro256(0).next_u64() == Xoshiro256(0).next_u64()
    True
    """

    def __init__(self, seed: int = 0, *, state: tuple[int, int, int, int] | None = None):
        if state is not None:
            if not any(state):
                raise ValueError("xoshiro256 state must not be all zero")
            self.s = [int(x) & MASK64 for x in state]
            return
        sm = int(seed) & MASK64
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    @classmethod
    def from_path(cls, seed: int, *path: object) -> "Xoshiro256":
        return cls(derive_seed(seed, *path))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def bit(self) -> int:
        """A fair coin from the most significant bit."""
        return self.next_u64() >> 63

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) (Lemire-style rejection on 64 bits)."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) % n
        while True:
            x = self.next_u64()
            m = x * n
            if (m & MASK64) >= threshold:
                return m >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n) (partial Fisher-Yates), in draw order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.random() for _ in range(n)], dtype=np.float64)

    def normals(self, shape) -> np.ndarray:
        """Standard normal draws via Box-Muller, filled in C order."""
        size = int(np.prod(shape)) if np.ndim(shape) else int(shape)
        pairs = (size + 1) // 2
        u = self.uniforms(2 * pairs).reshape(pairs, 2)
        # 1 - u keeps the log argument in (0, 1]
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * math.pi * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(theta)
        out[:, 1] = radius * np.sin(theta)
        return out.reshape(-1)[:size].reshape(shape)

    def unit_vector(self, d: int) -> np.ndarray:
        v = self.normals(d)
        return v / np.linalg.norm(v)
