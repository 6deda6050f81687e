"""Deterministic seed derivation for oracles, provers and verifiers.

Every protocol run owns a 64-bit master seed from which all role streams are
derived through a fixed, documented tree (see ``docs/prng.md``):

* Seed derivation uses the SplitMix64 finalizer with the golden-gamma
  increment, so the tree is reproducible from the constants alone.
* Bulk sampling delegates to ``numpy.random.Generator`` (PCG64) keyed by a
  derived 64-bit seed via ``SeedSequence``.

String labels are folded in with FNV-1a so that streams are addressed by
role name ("oracle", "prover", "verifier", ...) rather than by positional
convention.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood constants)."""
    z &= _MASK
    z ^= z >> 30
    z = (z * _MIX_MUL_1) & _MASK
    z ^= z >> 27
    z = (z * _MIX_MUL_2) & _MASK
    z ^= z >> 31
    return z


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK
    return h


def _key64(key) -> int:
    if isinstance(key, str):
        return fnv1a64(key.encode("utf-8"))
    if isinstance(key, (int, np.integer)):
        return int(key) & _MASK
    raise TypeError(f"stream key must be str or int, got {type(key).__name__}")


def derive(seed: int, *keys) -> int:
    """Derive a child seed by folding labels into the parent seed.

    ``derive(s, a, b)`` equals ``derive(derive(s, a), b)``; distinct label
    paths give statistically independent streams.
    """
    s = int(seed) & _MASK
    for key in keys:
        s = mix64(s ^ mix64((_key64(key) + GOLDEN_GAMMA) & _MASK))
    return s


class SplitMix64:
    """Sequential SplitMix64 stream, used where a tiny pure-Python RNG suffices."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & _MASK
        return mix64(self.state)

    def next_float(self) -> float:
        # 53-bit mantissa draw in [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53


def generator(seed: int, *keys) -> np.random.Generator:
    """numpy Generator keyed by the derived 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(derive(seed, *keys))))
