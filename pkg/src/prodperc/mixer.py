"""Stateless 64-bit hashing used to decide every edge of a percolation sample.

The finalizer is SplitMix64's (Steele, Lea & Flood 2014).  A word sequence
``w1, ..., wk`` under seed ``s`` hashes to

    h0 = mix(s + GOLDEN)
    h_j = mix((h_{j-1} XOR w_j) + GOLDEN)

with all arithmetic modulo 2**64.  Changing any constant here changes every
recorded sample, so treat this file as a frozen format.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 2.0**-53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def fold(h: int, w: int) -> int:
    """Absorb one word into a chain state."""
    return mix64((h ^ (w & MASK64)) + GOLDEN)


def hash_words(seed: int, *words: int) -> int:
    h = mix64(seed + GOLDEN)
    for w in words:
        h = fold(h, w)
    return h


def to_unit(h: int) -> float:
    """Top 53 bits of ``h`` as a float in [0, 1)."""
    return (h >> 11) * _INV53


_G = np.uint64(GOLDEN)
_U1 = np.uint64(_M1)
_U2 = np.uint64(_M2)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _U1
    z = (z ^ (z >> np.uint64(27))) * _U2
    return z ^ (z >> np.uint64(31))


def hash_words_array(seed, *words) -> np.ndarray:
    """Broadcasting twin of :func:`hash_words`; accepts arrays for any argument."""
    h = mix64_array(np.atleast_1d(np.asarray(seed, dtype=np.uint64)) + _G)
    for w in words:
        w = np.asarray(w)
        if w.dtype != np.uint64:
            w = (w.astype(object) & MASK64).astype(np.uint64) if w.dtype == object else w.astype(np.uint64)
        h = mix64_array((h ^ w) + _G)
    return h


def fold_array(prefix: int, word: np.ndarray) -> np.ndarray:
    """Array twin of :func:`fold` for a scalar chain state."""
    h = np.uint64(prefix) ^ np.asarray(word, dtype=np.uint64)
    return mix64_array(h + _G)


def to_unit_array(h: np.ndarray) -> np.ndarray:
    return (np.asarray(h, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * _INV53
