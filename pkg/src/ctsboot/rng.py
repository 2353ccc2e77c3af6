"""Hierarchical, reproducible random streams.

A stream is a master seed plus a path of integer keys.  Child streams extend
the path, so independent consumers (replications, replicate chunks, the two
series of a pair) each get their own reproducible generator regardless of
the order in which they run.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def stable_key(value: int | str | float) -> int:
    """Map a path component to a non-negative integer, stable across runs."""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        if value < 0:
            raise ValueError(f"stream keys must be non-negative, got {value}")
        return int(value)
    if isinstance(value, float):
        # deltas like 0.075 -> stable integer; 1e-9 resolution is plenty
        return zlib.crc32(repr(round(value, 9)).encode())
    return zlib.crc32(str(value).encode())


@dataclass(frozen=True)
class RandomStream:
    seed: int
    path: tuple[int, ...] = ()

    def child(self, *keys: int | str | float) -> RandomStream:
        return RandomStream(self.seed, self.path + tuple(stable_key(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


def as_stream(stream: RandomStream | int | None) -> RandomStream:
    if isinstance(stream, RandomStream):
        return stream
    return RandomStream(0 if stream is None else int(stream))
