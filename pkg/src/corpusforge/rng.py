"""Deterministic 64-bit PRNG used everywhere randomness is needed.

SplitMix64 is the single source of randomness in the pipeline: noise
synthesis, shuffles, and per-utterance seed derivation all flow from it so
that a fixed seed gives byte-identical outputs on any platform.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First n outputs of SplitMix64 seeded with `seed`, as uint64."""
    if n < 0:
        raise ValueError("n must be >= 0")
    state = (np.uint64(seed & _MASK)
             + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GAMMA))
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int) -> np.ndarray:
    """n doubles in [0, 1), one per SplitMix64 output (53-bit mantissa)."""
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


class SplitMix64:
    """Sequential form, for shuffles and other draw-by-draw consumers."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def next_uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Integer in [0, bound), by scaling a 53-bit uniform."""
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        return int(self.next_uniform() * bound)


def shuffle(items: list, seed: int) -> list:
    """Seeded Fisher-Yates; returns a new list, input untouched."""
    out = list(items)
    gen = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = gen.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def derive_seed(base_seed: int, key: str) -> int:
    """Stable per-item seed: FNV-1a of the key folded into the base seed."""
    h = _FNV_OFFSET
    for b in key.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return _mix((base_seed ^ h) & _MASK)
