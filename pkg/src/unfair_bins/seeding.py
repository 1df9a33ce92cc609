"""Deterministic seed derivation and generator construction.

All randomness flows through numpy's Philox generator, a counter-based
bit generator with a published state-transition contract. Seeds for
individual trials are derived as pure functions of
``(master_seed, trial_index, purpose_tag)`` so that

* distinct trials consume statistically independent streams, and
* any single trial can be reproduced in isolation from the master seed.

The derivation is: ``SeedSequence([master_seed, trial, crc32(purpose)])``
hashed down to one unsigned 64-bit word.
"""

from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def purpose_code(purpose: str) -> int:
    """Stable 32-bit code for a purpose tag (CRC-32 of its UTF-8 bytes)."""
    return zlib.crc32(purpose.encode("utf-8"))


def derive_seed(master_seed: int, trial: int, purpose: str) -> int:
    """64-bit seed that is a pure function of (master_seed, trial, purpose)."""
    if not 0 <= master_seed <= MAX_SEED:
        raise ValueError(f"master_seed must be in [0, 2**64), got {master_seed}")
    if trial < 0:
        raise ValueError(f"trial index must be >= 0, got {trial}")
    ss = np.random.SeedSequence([master_seed, trial, purpose_code(purpose)])
    return int(ss.generate_state(1, np.uint64)[0])


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator seeded through a SeedSequence of ``seed``."""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
