"""Deterministic seed derivation.

Every random decision in the package draws from a generator derived here, so
results are independent of execution schedule: a trial's stream depends only
on the labels used to derive it, never on how many other streams were
consumed before it.
"""

from __future__ import annotations

import hashlib

import numpy as np

SeedPart = "int | str | np.integer"


def _as_words(part) -> list[int]:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"seed parts must be non-negative, got {part}")
        return [int(part)]
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        # four uint32 words keep the full label entropy without huge ints
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    raise TypeError(f"unsupported seed part type: {type(part)!r}")


def seed_sequence(*parts) -> np.random.SeedSequence:
    entropy: list[int] = []
    for part in parts:
        entropy.extend(_as_words(part))
    return np.random.SeedSequence(entropy)


def derive_seed(*parts) -> int:
    """Collapse labels into a stable uint64 seed."""
    return int(seed_sequence(*parts).generate_state(1, np.uint64)[0])


def derive_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(*parts))
