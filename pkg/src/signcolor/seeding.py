"""Deterministic seed derivation for placements, outcomes and sweep cells.

Substream seeds are the first 8 bytes (big-endian) of
blake2b("signcolor|" + "|".join(repr(part) for part in parts)), so every
(master seed, label, indices...) tuple maps to one reproducible 64-bit seed
independent of worker count or execution order. This scheme is part of the
output contract: result rows record the master seed and regenerate exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    text = "signcolor|" + "|".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def substream(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
