"""Deterministic random streams keyed by (seed, path).

Every consumer derives its own generator from a root seed and a tuple of
integers (node id, copy index, ...), so results do not depend on evaluation
order or on how work is split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = ["Stream"]


@dataclass(frozen=True)
class Stream:
    seed: int
    key: Tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "key", tuple(int(k) for k in self.key))

    def child(self, *idx: int) -> "Stream":
        return Stream(self.seed, self.key + tuple(idx))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def describe(self) -> str:
        return f"seed={self.seed} stream={'/'.join(map(str, self.key)) or 'root'}"
