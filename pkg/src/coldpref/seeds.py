"""Deterministic derivation of independent child seeds from a master seed."""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(master_seed: int, *tokens: object) -> int:
    """Derive a stable 63-bit seed from a master seed and a role path.

    Distinct token paths yield independent random streams. The derivation
    is hash-based so it is stable across platforms, processes, and runs.
    """
    digest = hashlib.sha256()
    digest.update(str(int(master_seed)).encode())
    for token in tokens:
        digest.update(b"/")
        digest.update(str(token).encode())
    return int.from_bytes(digest.digest()[:8], "big") >> 1


def as_generator(rng: int | np.random.Generator) -> np.random.Generator:
    """Accept either a seed or an existing generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
