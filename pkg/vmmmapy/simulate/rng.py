"""Deterministic random substreams derived from one master seed"""
from __future__ import annotations

# Third-Party
import numpy as np

__all__: tuple[str, ...] = ("substream", "VOLATILITY_STREAM", "NOISE_STREAM")

VOLATILITY_STREAM = 0
NOISE_STREAM = 1


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """
    An independent PCG64 stream for the spawn key under master_seed.

    ### Arguments
    - master_seed (int): Nonnegative master seed
    - key (int): Spawn key, e.g. (replication, VOLATILITY_STREAM)

    ### Returns
    - np.random.Generator: The same stream for the same seed and key
    """
    if master_seed < 0 or any(part < 0 for part in key):
        raise ValueError("seeds and spawn keys must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=tuple(key))))
