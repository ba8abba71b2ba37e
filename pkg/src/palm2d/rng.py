"""Portable counter-based random numbers (SplitMix64).

Output ``i`` (i = 1, 2, ...) of the stream with seed ``s`` is::

    z = s + i * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    out = z ^ (z >> 31)

Uniform doubles are ``(out >> 11) * 2**-53``.  Integers in ``[lo, hi)`` are
``lo + floor(u * (hi - lo))``.  Normals use Box-Muller on consecutive pairs
``(u1, u2)``: ``sqrt(-2 ln(1 - u1)) * (cos(2 pi u2), sin(2 pi u2))``.
Child streams are seeded with ``mix(seed ^ (tag * 0xD1B54A32D192ED03))``.
Every draw is a pure function of (seed, position), so streams are identical
on every platform.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TAG = 0xD1B54A32D192ED03
MASK64 = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.position = 0

    def uint64(self, size: int) -> np.ndarray:
        i = np.arange(self.position + 1, self.position + size + 1, dtype=np.uint64)
        self.position += size
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + i * GOLDEN
        return mix64(z)

    def random(self, size: int) -> np.ndarray:
        return (self.uint64(size) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def integers(self, lo: int, hi: int, size: int) -> np.ndarray:
        if hi <= lo:
            raise ValueError("empty integer range")
        return lo + np.floor(self.random(size) * (hi - lo)).astype(np.int64)

    def normal(self, size: int) -> np.ndarray:
        m = (size + 1) // 2
        u = self.random(2 * m).reshape(m, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        t = 2.0 * np.pi * u[:, 1]
        return np.column_stack([r * np.cos(t), r * np.sin(t)]).ravel()[:size]

    def child(self, tag: int) -> "SplitMix64":
        s = int(mix64(np.uint64(self.seed ^ ((tag * _TAG) & MASK64))))
        return SplitMix64(s)
