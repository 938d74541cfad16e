"""Seeded random streams.

Every stream is a PCG64 generator keyed by ``SeedSequence(seed, spawn_key=key)``,
so a stream depends only on the master seed and its key, never on draw order
elsewhere in the program.
"""

import numpy as np

from classical_limit.validation import ValidationError

SEED_MAX = 2**64 - 1

# Leading spawn-key components, one namespace per consumer.
INIT_STREAM = 0
SHUFFLE_STREAM = 1
SPLIT_STREAM = 2
SAMPLE_STREAM = 3


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= SEED_MAX:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return int(seed)


def substream(seed, *key):
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng):
    """Accept a ``Generator`` or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(rng)
