"""Deterministic random streams keyed by (seed, labels...)."""

from __future__ import annotations

import hashlib

import numpy as np


def stable_key(label) -> int:
    """Map an int or string to a 32-bit int that is stable across processes."""
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("stream keys must be nonnegative")
        return int(label)
    digest = hashlib.sha256(str(label).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the stream ``(seed, *labels)``.

    Adding labels never perturbs other streams, so extra trials can be run
    without changing earlier ones.
    """
    return np.random.default_rng(np.random.SeedSequence([stable_key(seed), *map(stable_key, labels)]))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
