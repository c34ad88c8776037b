"""Seeded randomness: one 64-bit seed, hashed substreams, reproducible runs."""

from __future__ import annotations

import numpy as np


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for substream `index` of `seed`.

    Substreams are derived by hashing (seed, index), so concurrent or
    sharded Monte-Carlo loops stay independent and reproducible.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def bernoulli_masks(rng: np.random.Generator, m: int, nbits: int, p: float) -> np.ndarray:
    """m bitmasks on nbits bits, each bit set independently with probability p."""
    bits = rng.random((m, nbits)) < p
    return pack_masks(bits)


def uniform_masks(rng: np.random.Generator, m: int, nbits: int) -> np.ndarray:
    """m uniform bitmasks in [0, 2**nbits)."""
    return rng.integers(0, 1 << nbits, size=m, dtype=np.int64)


def pack_masks(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean (m, nbits) matrix into integer masks, bit j = column j."""
    powers = np.int64(1) << np.arange(bits.shape[1], dtype=np.int64)
    return bits.astype(np.int64) @ powers
