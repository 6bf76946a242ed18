"""Time grids, sample paths and path ensembles.

Paths live on uniform grids ``t_k = k * T / n`` and are read between grid
points by linear interpolation, the same convention every functional uses.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from brownkit._backend import BACKEND, core
from brownkit.errors import DomainError, PreconditionError

if TYPE_CHECKING:
    from brownkit.functionals import Functional
    from brownkit.generators import GeneratorSpec

GRID_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of ``[0, horizon]`` into ``steps`` intervals."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise DomainError(f"horizon must be positive and finite, got {self.horizon!r}")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 1:
            raise DomainError(f"steps must be a positive integer, got {self.steps!r}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def time(self, k: int) -> float:
        # from the index, never accumulated
        return (k * self.horizon) / self.steps

    def times(self) -> np.ndarray:
        return (np.arange(self.steps + 1, dtype=np.float64) * self.horizon) / self.steps

    def locate(self, t: float) -> int:
        """Largest index ``k`` with ``t_k <= t``."""
        k = min(max(int(math.floor(t / self.horizon * self.steps)), 0), self.steps)
        while k < self.steps and self.time(k + 1) <= t:
            k += 1
        while k > 0 and self.time(k) > t:
            k -= 1
        return k

    def index_of(self, t: float) -> int | None:
        """Grid index of ``t`` if ``t`` is a grid point (up to rounding), else None."""
        x = t / self.horizon * self.steps
        k = round(x)
        if 0 <= k <= self.steps and abs(x - k) <= GRID_TOL * max(1.0, abs(x)):
            return int(k)
        return None

    def check_time(self, t: float) -> float:
        if not (0.0 <= t <= self.horizon):
            raise DomainError(f"time {t!r} outside [0, {self.horizon}]")
        return float(t)

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "steps": self.steps}


@dataclass(frozen=True, eq=False)
class Path:
    """One realization on a grid; ``values[k]`` is the value at ``t_k``."""

    grid: TimeGrid
    values: np.ndarray
    start_value: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.grid.steps + 1:
            raise PreconditionError(
                f"expected {self.grid.steps + 1} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("path values must be finite")
        start = float(v[0]) if self.start_value is None else float(self.start_value)
        if v[0] != start:
            raise PreconditionError(f"values[0]={v[0]!r} differs from start_value={start!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "start_value", start)

    @property
    def horizon(self) -> float:
        return self.grid.horizon

    def times(self) -> np.ndarray:
        return self.grid.times()

    def value_at(self, t: float) -> float:
        return value_at(self, t)

    def to_csv(self, target) -> None:
        write_path_csv(self, target)


def value_at(path: Path, t: float) -> float:
    """Path value at time ``t``, linear between grid points."""
    t = path.grid.check_time(t)
    k = path.grid.locate(t)
    tk = path.grid.time(k)
    v = path.values
    if k == path.grid.steps or tk == t:
        return float(v[k])
    w = (t - tk) / (path.grid.time(k + 1) - tk)
    return float(v[k] + w * (v[k + 1] - v[k]))


def restrict(path: Path, new_horizon: float) -> Path:
    """Prefix of ``path`` up to the grid point ``new_horizon``."""
    k = path.grid.index_of(new_horizon)
    if k is None or k == 0:
        raise PreconditionError(f"{new_horizon!r} is not a positive grid point")
    if k == path.grid.steps:
        return path
    grid = TimeGrid(path.grid.time(k), k)
    return Path(grid, path.values[:k + 1], path.start_value)


# ---------------------------------------------------------------- serialization

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_path_csv(path: Path, target) -> None:
    """Write ``t,value`` rows (17 significant digits) to a filename or text stream."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_path_csv(path, fh)
        return
    target.write("t,value\n")
    for t, v in zip(path.times(), path.values):
        target.write(f"{_fmt(t)},{_fmt(v)}\n")


def read_path_csv(source, start_value: float | None = None) -> Path:
    """Read a path written by :func:`write_path_csv`."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_path_csv(fh, start_value)
    rows = list(csv.reader(source))
    if not rows or rows[0] != ["t", "value"]:
        raise PreconditionError("path CSV must start with header 't,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=np.float64)
    if data.shape[0] < 2:
        raise PreconditionError("path CSV needs at least two rows")
    grid = TimeGrid(float(data[-1, 0]), data.shape[0] - 1)
    if not np.allclose(data[:, 0], grid.times(), rtol=0, atol=1e-12 * grid.horizon):
        raise PreconditionError("path CSV times are not a uniform grid from 0")
    return Path(grid, data[:, 1], start_value)


def path_csv_text(path: Path) -> str:
    buf = io.StringIO()
    write_path_csv(path, buf)
    return buf.getvalue()


# ---------------------------------------------------------------- ensembles

@dataclass(frozen=True)
class Ensemble:
    """``count`` paths of one generator; path ``i`` depends only on (spec, seed, i)."""

    spec: "GeneratorSpec"
    master_seed: int
    count: int
    chunk: int = field(default=256, repr=False)

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"count must be positive, got {self.count!r}")

    def __len__(self) -> int:
        return self.count

    def path(self, index: int) -> Path:
        from brownkit.generators import generate
        from brownkit.rng import StreamKey

        if not 0 <= index < self.count:
            raise IndexError(index)
        return generate(self.spec, StreamKey(self.master_seed, index))

    def __iter__(self) -> Iterator[Path]:
        for i in range(self.count):
            yield self.path(i)

    def evaluate(self, functionals: Sequence["Functional"], workers: int = 1) -> np.ndarray:
        """Evaluate functionals on every path without materializing the ensemble.

        Returns shape ``(count, len(functionals))``; CENSORED/NONE are NaN.
        Rows are merged by path index, so ``workers`` never changes the result.
        """
        from brownkit.functionals import request_rows
        from brownkit.generators import kernel_params

        kind, params = kernel_params(self.spec)
        requests = request_rows(functionals, self.spec)
        starts = list(range(0, self.count, self.chunk))

        def run(first: int) -> np.ndarray:
            n = min(self.chunk, self.count - first)
            return core.ensemble(kind, params, self.master_seed, first, n, requests)

        if workers <= 1 or len(starts) == 1:
            parts = [run(s) for s in starts]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, starts))
        return np.concatenate(parts, axis=0)

    def manifest(self) -> dict:
        return {
            "schema": "brownkit.ensemble/1",
            "generator": self.spec.to_dict(),
            "master_seed": self.master_seed,
            "count": self.count,
            "grid": self.spec.grid.to_dict(),
            "backend": BACKEND,
        }

    def write_manifest(self, filename) -> None:
        with open(filename, "w", encoding="utf-8", newline="") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
