"""Named, reproducible random sub-streams derived from one 64-bit seed."""

import zlib

import numpy as np


def fresh_seed():
    """Draw a new 64-bit seed from OS entropy."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])


def substream(seed, *names):
    """Independent generator for the path ``names`` under ``seed``.

    The same ``(seed, names)`` always yields the same stream, and streams
    for different names are statistically independent.
    """
    key = tuple(n if isinstance(n, int) else zlib.crc32(str(n).encode()) for n in names)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def derive_seed(seed, *names):
    """Deterministic 63-bit child seed for the path ``names``."""
    return int(substream(seed, *names).integers(0, 2 ** 63 - 1))
