"""Deterministic random draws for reproducible corpus processing.

Every random decision in the package flows through the SplitMix64 sequence
below, seeded from a documented mix of the global seed, the utterance id,
and the augmentation copy index.  The update constants are written out so
that the exact same draws can be reproduced outside this package (any
language with 64-bit unsigned arithmetic suffices):

    state    <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z        <- state
    z        <- ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z        <- ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output   <- z xor (z >> 31)

Uniform floats take the top 53 bits of the output: u = (output >> 11) * 2^-53.

Utterance-level seeds are derived as

    seed = global_seed XOR fnv1a64(utf8(utterance_id) || 0x1F || ascii(copy_index))

with FNV-1a using offset basis 0xCBF29CE484222325 and prime 0x100000001B3.
Independent sub-streams (frame-level draws, mask draws) come from
``substream(seed, tag)`` which is the SplitMix64 finalizer applied to
``seed XOR tag * 0x9E3779B97F4A7C15``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective scramble."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(global_seed: int, utterance_id: str, copy_index: int = 0) -> int:
    """Stable per-(utterance, copy) seed; identical across runs and platforms."""
    tag = utterance_id.encode("utf-8") + b"\x1f" + str(copy_index).encode("ascii")
    return (global_seed ^ fnv1a64(tag)) & _MASK64


def substream(seed: int, tag: int) -> int:
    """Seed for an independent draw stream hanging off ``seed``."""
    return mix64((seed ^ (tag * _GAMMA)) & _MASK64)


class SplitMix64:
    """Tiny deterministic generator; one instance per utterance/stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return low + (high - low) * u

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n); n == 0 returns 0 without consuming a draw."""
        if n <= 0:
            return 0
        return min(int(self.uniform() * n), n - 1)
