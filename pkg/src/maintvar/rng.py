"""Counter-based random streams.

All randomness is derived from one integer seed. A stream is addressed by a
path of labels (``stream(seed, "rf", 3)`` for tree 3 of a forest), hashed into
the Philox key, so streams are independent of the order they are consumed in.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

SEED_ENV = "MAINTVAR_SEED"
DEFAULT_SEED = 0


def _path_key(path: tuple) -> int:
    h = hashlib.blake2b(repr(path).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def stream(seed: int, *path) -> np.random.Generator:
    """Return an independent generator for ``(seed, *path)``."""
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, _path_key(path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def resolve_seed(seed: int | None) -> int:
    """Explicit seed wins, then ``$MAINTVAR_SEED``, then 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return DEFAULT_SEED
