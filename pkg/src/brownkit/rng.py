"""Deterministic, splittable random streams.

Every variate is addressed by ``(master_seed, stream_index, position)``:
a Philox4x64-10 block is computed for counter
``(position // 4, domain, stream_index, 0)`` under key ``(master_seed, 0)``.
Gaussian and uniform streams live in different counter domains, so they never
share blocks. Normals come from a Box-Muller pair inside each block, which
keeps every position directly addressable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from brownkit._backend import core

_U64 = 1 << 64
_BLOCK = 4096


@dataclass(frozen=True)
class StreamKey:
    """Identifies one reproducible stream: a path index under a master seed."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def child(self, stream_index: int) -> "StreamKey":
        return StreamKey(self.master_seed, stream_index)


def gaussian_block(key: StreamKey, start: int, count: int) -> np.ndarray:
    """Standard normals at stream positions ``start .. start+count-1``."""
    return core.gaussian_block(key.master_seed, key.stream_index, start, count)


def uniform_block(key: StreamKey, start: int, count: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) at positions ``start .. start+count-1``."""
    return core.uniform_block(key.master_seed, key.stream_index, start, count)


def _stream(fill, key: StreamKey) -> Iterator[float]:
    pos = 0
    while True:
        for x in fill(key, pos, _BLOCK):
            yield float(x)
        pos += _BLOCK


def gaussian_stream(key: StreamKey) -> Iterator[float]:
    """Infinite iterator of standard-normal variates for ``key``."""
    return _stream(gaussian_block, key)


def uniform_stream(key: StreamKey) -> Iterator[float]:
    """Infinite iterator of uniform(0, 1) variates for ``key``; never 0 or 1."""
    return _stream(uniform_block, key)
