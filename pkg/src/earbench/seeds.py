"""Deterministic seed derivation.

Every random draw in the pipeline comes from a Generator seeded through
`derive_seed(global_seed, stage, *keys)`, so any subset of the corpus can be
regenerated bit-identically without ambient entropy.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(global_seed: int, stage: str, *keys) -> int:
    """64-bit seed from a stable hash of (global_seed, stage, keys)."""
    text = ":".join([str(global_seed), stage, *[str(k) for k in keys]])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(global_seed: int, stage: str, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(global_seed, stage, *keys))
