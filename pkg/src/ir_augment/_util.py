"""Small shared helpers: rounding, hashing, RNG derivation."""

from __future__ import annotations

import hashlib
import math

import numpy as np


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    Python's built-in ``round`` rounds halves to even, which breaks exact
    size-law arithmetic such as ``round(0.5 * 4177) == 2089``.
    """
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def stable_key_hash(*parts) -> int:
    """Deterministic 64-bit hash of a tuple of stringifiable parts.

    Unlike ``hash()``, this is stable across processes and runs, so it can
    seed per-task RNGs reproducibly.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(seed: int, *parts) -> np.random.Generator:
    """Derive an independent, reproducible RNG for a named sub-task."""
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, stable_key_hash(*parts)]))
