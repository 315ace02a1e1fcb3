"""Deterministic random-number plumbing.

All randomness in the package flows from a single integer master seed.
Per-task generators are derived from ``(master_seed, *path)`` where the
path components name the consumer (replicate index, grid cell, side of a
comparison).  Derivation goes through ``numpy.random.SeedSequence``, whose
entropy-mixing hash is stable across platforms and numpy releases, feeding
a counter-based Philox generator.  Because each consumer hashes its own
path, replicates are order-independent: computing replicate 17 never
requires drawing replicates 0..16 first.

Pinned algorithm: numpy ``SeedSequence`` + ``Philox`` (document the numpy
version alongside archived outputs; numpy guarantees stream stability for
a fixed algorithm).
"""

from __future__ import annotations

import hashlib

import numpy as np

_WORD_MASK = (1 << 63) - 1


def _coerce_word(part) -> int:
    """Map a path component (int or str label) to a SeedSequence word."""
    if isinstance(part, (bool,)):
        raise TypeError("bool is not a valid seed-path component")
    if isinstance(part, (int, np.integer)):
        return int(part) & _WORD_MASK
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") & _WORD_MASK
    raise TypeError(f"seed-path components must be int or str, got {type(part)!r}")


def seed_words(master_seed: int, *path) -> tuple[int, ...]:
    return tuple(_coerce_word(p) for p in (master_seed, *path))


def derive_rng(master_seed: int, *path) -> np.random.Generator:
    """Generator for the task named by ``path``, derived from the master seed."""
    ss = np.random.SeedSequence(list(seed_words(master_seed, *path)))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(seed_or_rng) -> np.random.Generator:
    """Accept either a ready Generator or an integer master seed."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return derive_rng(int(seed_or_rng))
