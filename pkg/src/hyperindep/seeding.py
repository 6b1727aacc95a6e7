"""Deterministic seed derivation.

Every random quantity is drawn from a ``numpy.random.Generator`` (PCG64) built
from ``SeedSequence(entropy=master, spawn_key=(label_hash, *indices))`` where
``label_hash`` is the CRC-32 of the UTF-8 experiment label.  Identical
``(master, label, indices)`` always yield identical streams, independent of
worker count or scheduling.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass

import numpy as np

SEED_ENV_VAR = "HYPERINDEP_SEED"
DEFAULT_SEED = 20240601
_MASK64 = (1 << 64) - 1


def default_master() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    return int(raw, 0) & _MASK64 if raw else DEFAULT_SEED


def label_hash(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class Seed:
    """A master seed plus a path of substream indices."""

    master: int = DEFAULT_SEED
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master) <= _MASK64:
            raise ValueError("master seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "master", int(self.master))
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, *indices: int | str) -> "Seed":
        """Substream seed; string indices are replaced by their CRC-32."""
        keys = tuple(label_hash(i) if isinstance(i, str) else int(i) for i in indices)
        return Seed(self.master, self.path + keys)

    def trial(self, index: int) -> "Seed":
        return self.child(index)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed: "Seed | int | None") -> Seed:
    if isinstance(seed, Seed):
        return seed
    if seed is None:
        return Seed(default_master())
    return Seed(int(seed))


def experiment_seed(master: int, label: str, trial: int) -> Seed:
    return Seed(master).child(label, trial)
