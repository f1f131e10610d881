"""Deterministic 64-bit hashing primitives shared across the package.

Everything downstream (equivalence classes, Bloom filter probes, fold
assignment) is a pure function of term lexical forms and an explicit seed,
so two runs over reordered input files agree bit-for-bit.
"""

from __future__ import annotations

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# Second fixed seed for double hashing (Bloom probes). Any odd constant
# distinct from the offset basis works; this one is 2^64 / golden ratio.
FNV_SEED_ALT = 0x9E3779B97F4A7C15


def fnv1a_64(data: bytes, seed: int = FNV_OFFSET_BASIS) -> int:
    """FNV-1a over ``data``, truncated to 64 bits.

    ``seed`` replaces the offset basis, giving independent hash functions
    from one code path.
    """
    h = seed & _MASK64
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def mix64(x: int) -> int:
    """splitmix64 finalizer; spreads low-entropy inputs over 64 bits."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def keyed_hash(data: bytes, seed: int) -> int:
    """Seeded 64-bit hash of ``data``, stable across runs and platforms.

    Used wherever a per-item pseudo-random decision (fold, subsample) must
    depend only on the item's lexical form and the run seed, never on file
    order or interning order.
    """
    return mix64(fnv1a_64(data) ^ mix64(seed & _MASK64))
