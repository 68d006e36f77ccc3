"""Role-tagged seed derivation.

Every random quantity in the package is derived from a single master seed and
a tuple of tags, so results never depend on execution order.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed, *tags):
    """Return a 64-bit seed deterministically derived from ``seed`` and ``tags``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed) & MASK64).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest(), "little")


def rng_for(seed, *tags):
    return np.random.default_rng(derive_seed(seed, *tags))
