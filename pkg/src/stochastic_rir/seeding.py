"""Seed derivation.

Every random draw in the package descends from a single 64-bit seed through
two documented steps, so that batches can be reproduced item by item by any
implementation:

1. ``derive_seed(base_seed, index)`` is the ``index``-th output (0-based) of a
   SplitMix64 generator whose state starts at ``base_seed``::

       z = (base_seed + (index + 1) * 0x9E3779B97F4A7C15) mod 2**64
       z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
       z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
       seed = z ^ (z >> 31)

2. ``stream(seed, purpose)`` builds a numpy ``Generator`` (PCG64) from
   ``SeedSequence(seed, spawn_key=(purpose,))``, i.e. the ``purpose``-th
   spawned child of ``SeedSequence(seed)``.  Purposes are fixed below.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

NOISE = 0
DELETION = 1
POLARITY = 2
SAMPLING = 3


def splitmix64_mix(z):
    """SplitMix64 output function applied to a 64-bit state value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of item ``index`` in a batch rooted at ``base_seed``."""
    if not 0 <= base_seed <= MASK64:
        raise ValueError(f"base seed {base_seed} is not a 64-bit unsigned integer")
    if index < 0:
        raise ValueError("index must be nonnegative")
    return splitmix64_mix(base_seed + (index + 1) * GOLDEN_GAMMA)


def stream(seed: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(purpose,))
    return np.random.Generator(np.random.PCG64(ss))
