"""Reproducible random-number streams for parallel Monte Carlo.

Every replica/chain owns a counter-based Philox stream derived from
(master seed, chain index), so results do not depend on scheduling or
thread count and merged summaries are reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["chain_rng", "spawn_seeds"]


def chain_rng(master_seed: int, chain_index: int, stream: int = 0) -> np.random.Generator:
    """Generator for one chain, independent of all other chains.

    `stream` separates independent uses within the same chain (e.g. map
    parameters vs. auxiliary jitter) without interleaving draws.
    """
    if chain_index < 0:
        raise ValueError("chain_index must be nonnegative")
    seq = np.random.SeedSequence(master_seed, spawn_key=(chain_index, stream))
    return np.random.Generator(np.random.Philox(seq))


def spawn_seeds(master_seed: int, n: int) -> list[int]:
    """n derived 64-bit seeds, stable under the master seed."""
    seq = np.random.SeedSequence(master_seed)
    return [int(s.generate_state(1)[0]) for s in seq.spawn(n)]
