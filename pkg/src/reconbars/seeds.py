"""Deterministic seed-substream derivation.

All randomness in the package flows from explicit 64-bit seeds through
``numpy.random.SeedSequence`` into PCG64 generators.  Independent
stages derive their own substreams via ``spawn_key`` paths, so the
stream layout is fixed and reproducible across platforms and across
any parallel schedule:

* measurement noise      -> ``substream_seed(master, NOISE_STREAM)``
* sampling-set draw      -> ``substream_seed(master, SAMPLING_STREAM)``
* bootstrap resampling   -> ``substream_seed(master, BOOTSTRAP_STREAM)``
* bootstrap resample j   -> generator at path ``(j,)`` of the bootstrap
  seed (0-based), i.e. ``rng_for(bootstrap_seed, j)``

This layout is part of the public contract: recorded seeds replay every
draw bit for bit.
"""

from __future__ import annotations

import numpy as np

NOISE_STREAM = 0
SAMPLING_STREAM = 1
BOOTSTRAP_STREAM = 2


def substream_seed(seed: int, index: int) -> int:
    """Derive the 64-bit seed of substream ``index`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally at a spawn-key subpath."""
    ss = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(p) for p in path)
    )
    return np.random.default_rng(ss)
