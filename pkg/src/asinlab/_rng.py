"""Seeded random substreams.

Every random draw in the package goes through :func:`substream`, which builds a
``numpy.random.PCG64`` generator from a ``SeedSequence`` keyed by
``(seed, *keys)``.  PCG64 and SeedSequence hashing are fully specified by
numpy, so a given ``(seed, keys)`` pair yields the same stream on any platform.
"""
import numpy as np

# Stage stream indices fanned out from a master seed.
STREAM_SCENEGEN = 1
STREAM_SENSOR = 2
STREAM_ASIN = 3
STREAM_TRAIN = 4
STREAM_RESOLUTION = 5

_U64 = 2**64


def _check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed >= _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def substream(seed, *keys):
    """Return an independent ``Generator`` for ``seed`` and the stream path ``keys``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seeds(seed, stream, count):
    """Draw ``count`` child seeds (uint64) for a stage."""
    rng = substream(seed, stream)
    return rng.integers(0, _U64, size=count, dtype=np.uint64)
