"""Deterministic seed derivation.

All randomness in a run flows from one master seed. Stage streams are
derived by hashing (master seed, stage label), so adding or reordering
stages never perturbs the others, and per-row substreams make results
independent of batching and scheduling.
"""

import hashlib

import numpy as np


def derive_seed(master: int, label: str) -> int:
    """Map (master seed, label) to a stable 64-bit substream seed."""
    digest = hashlib.sha256(f"{master}\x1f{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(master: int, label: str) -> np.random.Generator:
    """Fresh generator for one labelled stage of a run."""
    return np.random.default_rng(derive_seed(master, label))
