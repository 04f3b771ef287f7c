"""Deterministic derivation of per-seed RNG streams.

Ensemble runs derive one child seed per trajectory from a single master seed
so that results are reproducible independent of execution order or worker
count.  The derivation is the SplitMix64 finalizer applied to
``master + index * GOLDEN`` (all arithmetic mod 2**64):

    z  = master + index * 0x9E3779B97F4A7C15
    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Each child seed feeds a ``numpy.random.Generator(PCG64(child))`` stream.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def splitmix64(z: int) -> int:
    """One round of the SplitMix64 finalizer (64-bit avalanche)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def child_seed(master_seed: int, index: int) -> int:
    """Child seed for trajectory ``index`` under ``master_seed``."""
    if index < 0:
        raise ValueError("seed index must be non-negative")
    return splitmix64((master_seed + index * _GOLDEN) & _MASK)


def stream(seed: int) -> np.random.Generator:
    """A PCG64 generator seeded directly with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def child_stream(master_seed: int, index: int) -> np.random.Generator:
    """Generator for the derived child seed (see module docstring)."""
    return stream(child_seed(master_seed, index))
