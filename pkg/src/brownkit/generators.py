"""Path constructions: exact increments, dyadic midpoint refinement,
Karhunen-Loeve series, Donsker partial sums, the Brownian bridge and the
uniform empirical process.

Every generator is a pure function of ``(spec, key)``. Draws are read from
fixed stream positions, so a path never depends on how many workers produced
its neighbours.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from brownkit._backend import core
from brownkit.errors import SpecError
from brownkit.laws import kl_eigenvalues
from brownkit.paths import Path, TimeGrid
from brownkit.rng import StreamKey

_SQRT2 = math.sqrt(2.0)
# basis matrix limit for KL paths (doubles), about 400 MB
_KL_BASIS_LIMIT = 50_000_000


class Kind(str, enum.Enum):
    EXACT = "ExactIncrement"
    DYADIC = "DyadicRefine"
    KL = "KarhunenLoeve"
    DONSKER = "DonskerPartialSum"
    BRIDGE = "BrownianBridge"
    EMPIRICAL = "EmpiricalProcess"


# kernel codes, shared with the compiled core
_KIND_CODE = {Kind.EXACT: 0, Kind.DYADIC: 1, Kind.KL: 2, Kind.DONSKER: 3,
              Kind.BRIDGE: 4, Kind.EMPIRICAL: 5}

INCREMENT_LAWS = ("coin", "normal")
BASE_DISTRIBUTIONS = ("uniform",)


@dataclass(frozen=True)
class GeneratorSpec:
    """Which construction produces paths, and on which grid.

    Parameters
    ----------
    kind : Kind or str
        Construction name, e.g. ``"ExactIncrement"``.
    grid : TimeGrid
        Output grid. ``DyadicRefine`` needs ``steps = 2**level``;
        ``KarhunenLoeve``, ``BrownianBridge`` and ``EmpiricalProcess`` need
        ``horizon = 1``.
    start_value : float
        Constant shift applied to the whole path (the ``P^x`` start).
    kl_terms : int, optional
        Number of series terms (``KarhunenLoeve`` only).
    donsker_n : int, optional
        Walk length per unit time (``DonskerPartialSum`` only).
    increment_law : {"coin", "normal"}
        Step law of the walk (``DonskerPartialSum`` only).
    sample_size : int, optional
        Sample size of the empirical process (``EmpiricalProcess`` only).
    base_distribution : {"uniform"}
        Law of the empirical sample (``EmpiricalProcess`` only).
    """

    kind: Kind
    grid: TimeGrid
    start_value: float = 0.0
    kl_terms: int | None = None
    donsker_n: int | None = None
    increment_law: str = "coin"
    sample_size: int | None = None
    base_distribution: str = "uniform"

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise SpecError(f"unknown generator kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.grid, TimeGrid):
            raise SpecError("grid must be a TimeGrid")
        if not math.isfinite(self.start_value):
            raise SpecError("start_value must be finite")
        object.__setattr__(self, "start_value", float(self.start_value))
        unit = abs(self.grid.horizon - 1.0) <= 1e-12
        if kind is Kind.DYADIC and _log2(self.grid.steps) is None:
            raise SpecError(f"DyadicRefine needs a power-of-two step count, got {self.grid.steps}")
        if kind in (Kind.KL, Kind.BRIDGE, Kind.EMPIRICAL) and not unit:
            raise SpecError(f"{kind.value} is defined on [0, 1], got horizon {self.grid.horizon}")
        if kind is Kind.KL:
            _require_count("kl_terms", self.kl_terms)
            if (self.grid.steps + 1) * self.kl_terms > _KL_BASIS_LIMIT:
                raise SpecError("kl_terms * (steps + 1) exceeds the basis size limit")
        if kind is Kind.DONSKER:
            _require_count("donsker_n", self.donsker_n)
            if self.increment_law not in INCREMENT_LAWS:
                raise SpecError(f"increment_law must be one of {INCREMENT_LAWS}")
        if kind is Kind.EMPIRICAL:
            _require_count("sample_size", self.sample_size)
            if self.base_distribution not in BASE_DISTRIBUTIONS:
                raise SpecError(f"base_distribution must be one of {BASE_DISTRIBUTIONS}")

    @property
    def level(self) -> int | None:
        return _log2(self.grid.steps)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "grid": self.grid.to_dict(),
             "start_value": self.start_value}
        if self.kind is Kind.KL:
            d["kl_terms"] = self.kl_terms
        elif self.kind is Kind.DONSKER:
            d["donsker_n"] = self.donsker_n
            d["increment_law"] = self.increment_law
        elif self.kind is Kind.EMPIRICAL:
            d["sample_size"] = self.sample_size
            d["base_distribution"] = self.base_distribution
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        known = {"kind", "grid", "start_value", "kl_terms", "donsker_n",
                 "increment_law", "sample_size", "base_distribution"}
        extra = sorted(set(d) - known)
        if extra:
            raise SpecError(f"unknown generator fields {extra}")
        if "kind" not in d or "grid" not in d:
            raise SpecError("generator needs 'kind' and 'grid'")
        g = d["grid"]
        try:
            grid = TimeGrid(g["horizon"], g["steps"])
        except (KeyError, TypeError) as exc:
            raise SpecError(f"bad grid {g!r}") from exc
        return cls(**{**d, "grid": grid})


def _require_count(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise SpecError(f"{name} must be a positive integer, got {value!r}")


def _log2(n: int) -> int | None:
    return n.bit_length() - 1 if n > 0 and n & (n - 1) == 0 else None


def _expect(spec: GeneratorSpec, kind: Kind):
    if spec.kind is not kind:
        raise SpecError(f"expected a {kind.value} spec, got {spec.kind.value}")


def _path(spec: GeneratorSpec, values: np.ndarray) -> Path:
    return Path(spec.grid, values, spec.start_value)


# ---------------------------------------------------------------- generators

def generate_exact(spec: GeneratorSpec, key: StreamKey) -> Path:
    """Cumulative sum of independent ``N(0, dt)`` increments."""
    _expect(spec, Kind.EXACT)
    g = spec.grid
    return _path(spec, core.path_exact(key.master_seed, key.stream_index,
                                       g.steps, g.horizon, spec.start_value))


def generate_dyadic(spec: GeneratorSpec, key: StreamKey, level: int | None = None) -> Path:
    """Levy construction by conditional midpoint sampling.

    Stream position 0 gives the endpoint; the ``2**m`` midpoints added when
    refining level ``m`` use positions ``[2**m, 2**(m+1))``. A coarser path
    from the same key therefore agrees bit for bit at its own grid points.

    Parameters
    ----------
    level : int, optional
        Refinement level; must satisfy ``spec.grid.steps == 2**level``.
    """
    _expect(spec, Kind.DYADIC)
    if level is None:
        level = spec.level
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)) or level < 0:
        raise SpecError(f"level must be a nonnegative integer, got {level!r}")
    if spec.grid.steps != 1 << level:
        raise SpecError(f"grid has {spec.grid.steps} steps, level {level} needs {1 << level}")
    return _path(spec, core.path_dyadic(key.master_seed, key.stream_index, int(level),
                                        spec.grid.horizon, spec.start_value))


@lru_cache(maxsize=8)
def _kl_tables(steps: int, terms: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(steps + 1, dtype=np.float64) / steps
    freq = (np.arange(1, terms + 1, dtype=np.float64) - 0.5) * math.pi
    basis = np.ascontiguousarray(_SQRT2 * np.sin(np.outer(t, freq)))
    basis[0] = 0.0
    sqrt_lam = np.sqrt(kl_eigenvalues(terms))
    basis.setflags(write=False)
    sqrt_lam.setflags(write=False)
    return basis, sqrt_lam


def kl_basis(steps: int, terms: int) -> tuple[np.ndarray, np.ndarray]:
    """``phi_j(t_k)`` as a ``(steps + 1, terms)`` array, and ``sqrt(lambda_j)``."""
    return _kl_tables(int(steps), int(terms))


def generate_kl(spec: GeneratorSpec, key: StreamKey) -> Path:
    """Truncated series ``sum_j sqrt(lambda_j) V_j phi_j(t)`` on [0, 1].

    ``V_j`` is Gaussian stream position ``j - 1``. Each grid value sums the
    terms in ascending ``j`` with compensated summation.
    """
    _expect(spec, Kind.KL)
    basis, sqrt_lam = kl_basis(spec.grid.steps, spec.kl_terms)
    return _path(spec, core.path_kl(key.master_seed, key.stream_index,
                                    spec.start_value, basis, sqrt_lam))


def generate_donsker(spec: GeneratorSpec, key: StreamKey) -> Path:
    """Rescaled walk ``S_[nt] / sqrt(n)`` sampled onto the grid.

    Coin steps are ``+1`` when the uniform at position ``i`` is at least 1/2;
    normal steps read the Gaussian stream.
    """
    _expect(spec, Kind.DONSKER)
    g = spec.grid
    return _path(spec, core.path_donsker(key.master_seed, key.stream_index, g.steps,
                                         g.horizon, spec.start_value, spec.donsker_n,
                                         spec.increment_law == "coin"))


def generate_bridge(spec: GeneratorSpec, key: StreamKey) -> Path:
    """``B(t) - t B(1)`` from the exact-increment path of the same key."""
    _expect(spec, Kind.BRIDGE)
    g = spec.grid
    return _path(spec, core.path_bridge(key.master_seed, key.stream_index,
                                        g.steps, g.horizon, spec.start_value))


def generate_empirical_process(spec: GeneratorSpec, key: StreamKey) -> Path:
    """``sqrt(m) (F_m(t) - t)`` for ``m`` uniforms read from the uniform stream."""
    _expect(spec, Kind.EMPIRICAL)
    g = spec.grid
    return _path(spec, core.path_empirical(key.master_seed, key.stream_index, g.steps,
                                           g.horizon, spec.start_value, spec.sample_size))


_DISPATCH = {
    Kind.EXACT: generate_exact,
    Kind.DYADIC: generate_dyadic,
    Kind.KL: generate_kl,
    Kind.DONSKER: generate_donsker,
    Kind.BRIDGE: generate_bridge,
    Kind.EMPIRICAL: generate_empirical_process,
}


def generate(spec: GeneratorSpec, key: StreamKey) -> Path:
    """Produce the path for ``key`` with whichever construction ``spec`` names."""
    return _DISPATCH[spec.kind](spec, key)


def kernel_params(spec: GeneratorSpec) -> tuple[int, dict]:
    """Generator code and parameter dict for the batch ensemble kernel."""
    g = spec.grid
    params = {"steps": g.steps, "horizon": g.horizon, "start_value": spec.start_value}
    if spec.kind is Kind.DYADIC:
        params["level"] = spec.level
    elif spec.kind is Kind.KL:
        params["basis"], params["sqrt_lambda"] = kl_basis(g.steps, spec.kl_terms)
    elif spec.kind is Kind.DONSKER:
        params["donsker_n"] = spec.donsker_n
        params["coin"] = spec.increment_law == "coin"
    elif spec.kind is Kind.EMPIRICAL:
        params["sample_size"] = spec.sample_size
    return _KIND_CODE[spec.kind], params


# ---------------------------------------------------------------- explicit inputs

def partial_sum_path(increments, grid: TimeGrid, n: int | None = None,
                     start_value: float = 0.0) -> Path:
    """Donsker path ``start_value + S_[n t_k] / sqrt(n)`` from given steps.

    ``n`` is the walk length per unit time and defaults to
    ``len(increments)``; the steps must cover ``n * horizon``.
    """
    x = np.asarray(increments, dtype=np.float64)
    n = x.shape[0] if n is None else int(n)
    if n < 1:
        raise SpecError("need at least one increment")
    s = np.concatenate(([0.0], np.cumsum(x)))
    idx = [math.floor(n * t + 1e-9) for t in grid.times()]
    if idx[-1] > x.shape[0]:
        raise SpecError(f"{x.shape[0]} increments do not cover horizon {grid.horizon}")
    return Path(grid, start_value + s[idx] / math.sqrt(n), start_value)


def empirical_process_path(sample, grid: TimeGrid, start_value: float = 0.0) -> Path:
    """Uniform empirical process ``sqrt(m) (F_m(t_k) - t_k)`` of a given sample."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = x.shape[0]
    if m < 1:
        raise SpecError("need a nonempty sample")
    if abs(grid.horizon - 1.0) > 1e-12:
        raise SpecError("the empirical process lives on [0, 1]")
    t = grid.times()
    fn = np.searchsorted(x, t, side="right") / m
    return Path(grid, start_value + math.sqrt(m) * (fn - t), start_value)
