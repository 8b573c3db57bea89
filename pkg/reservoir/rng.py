"""
Seeded random streams.

All randomness flows through numpy's counter-based Philox generator seeded
from a SeedSequence. A stream is addressed by the master seed plus a spawn
key, so every consumer gets an independent, replayable stream regardless of
execution order or platform.

Stream layout used by the harness:

    (HAMILTONIAN, ham_index)             couplings J_ij
    (IPC_INPUT, ham_index)               uniform IPC input sequence
    (NOISE, grid_index, ham_index, k)    shot noise of run k
    (SHUFFLE, grid_index, ham_index)     shuffle-cutoff permutations
    (BENCHMARK,)                         initial-state jitter of task series
"""

from typing import Tuple

import numpy as np

HAMILTONIAN = 0
IPC_INPUT = 1
NOISE = 2
SHUFFLE = 3
BENCHMARK = 4

_SEED_MASK = (1 << 64) - 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the stream addressed by (seed, *stream)."""
    sequence = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *stream: int) -> int:
    """64-bit integer seed for a stream, for records and logs."""
    sequence = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK, spawn_key=tuple(int(s) for s in stream))
    words: Tuple[int, int] = tuple(int(w) for w in sequence.generate_state(2, dtype=np.uint32))
    return (words[0] << 32) | words[1]
