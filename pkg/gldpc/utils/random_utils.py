"""
Seed splitting. Every random stream is derived from the single user seed as
SeedSequence([seed, stream_tag, *indices]) and drawn with numpy's PCG64 generator;
Gaussian samples use numpy's Ziggurat `standard_normal`.
"""

import numpy as np

STREAM_BASE_GRAPH = 1
STREAM_PLAN = 2
STREAM_CHANNEL = 3
STREAM_ORDER = 4
STREAM_EGREEDY = 5
STREAM_TRAINING = 6


def derive_rng(seed: int, stream: int, *indices: int) -> np.random.Generator:
    """
    Independent generator for one (seed, stream, indices) tuple.

    Args:
        seed (int): User seed.
        stream (int): One of the STREAM_* tags.
        *indices (int): Further coordinates, e.g. SNR index and frame index.

    Returns:
        np.random.Generator: PCG64 generator, identical for identical arguments.
    """
    entropy = [int(seed), int(stream)] + [int(i) for i in indices]
    if any(value < 0 for value in entropy):
        raise ValueError(f"seed coordinates must be non-negative, got {entropy}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
