"""Reproducible random streams.

Every stochastic routine in the package draws from a Philox counter-based
generator keyed by an integer seed plus a derivation path.  Philox streams
are platform-stable and independent for distinct keys, so per-trial and
per-shard streams can be evaluated in any order (or concurrently) without
changing results.
"""

from __future__ import annotations

import numpy as np

__all__ = ["generator", "derive_seed"]


def _seed_sequence(seed: int, path: tuple) -> np.random.SeedSequence:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    for part in path:
        if not isinstance(part, (int, np.integer)) or part < 0:
            raise ValueError(f"stream path parts must be non-negative ints, got {path!r}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))


def generator(seed: int, *path: int) -> np.random.Generator:
    """Return the Philox generator for (seed, *path).

    The same arguments always produce the same stream; distinct paths give
    statistically independent streams.
    """
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, path)))


def derive_seed(seed: int, *path: int) -> int:
    """Collapse (seed, *path) to a single 63-bit integer sub-seed.

    Used where an API accepts only a scalar seed (e.g. per-trial sample
    specs) but the caller owns a master seed.
    """
    state = _seed_sequence(seed, path).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))
