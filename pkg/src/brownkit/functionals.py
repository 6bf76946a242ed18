"""Path functionals: extrema, hitting and last-zero times, occupation and
local time, quadratic variation, and the modulus, roughness and sign-change
statistics.

All functionals read the path as its linear interpolant. Each one is also
available as a request row for :meth:`brownkit.paths.Ensemble.evaluate`,
which runs it inside the batch kernel without building ``Path`` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from brownkit._backend import core
from brownkit.errors import DomainError, PreconditionError
from brownkit.paths import GRID_TOL, Path, TimeGrid

CENSORED = None


@dataclass(frozen=True)
class HittingRecord:
    """Outcome of a hitting-time search.

    ``time`` is None when the level is not reached before the horizon.
    ``degenerate`` marks a level equal to the start value, reported as time 0.
    """

    level: float
    time: float | None
    method: str = "interpolated"
    degenerate: bool = False

    @property
    def censored(self) -> bool:
        return self.time is None


@dataclass(frozen=True)
class LocalTimeEstimate:
    """Local time at ``level`` up to ``time``; ``method`` is occupation or tanaka."""

    level: float
    time: float
    epsilon: float | None
    value: float
    method: str


# ---------------------------------------------------------------- validation

def _finite(name, x):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def _time(grid: TimeGrid, t):
    if not isinstance(t, (int, float, np.floating, np.integer)) or math.isnan(t):
        raise DomainError(f"time must be a real number, got {t!r}")
    return grid.check_time(float(t))


def _positive(name, x):
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be positive, got {x!r}")
    return x


def _rows_value_at(grid, start, t):
    return (_time(grid, t), 0.0, 0.0)


def _rows_first_hit(grid, start, a):
    return (_finite("a", a), 0.0, 0.0)


def _rows_trunc(grid, start, a, after=1.0):
    after = _finite("after", after)
    if not 0 <= after < grid.horizon:
        raise DomainError(f"horizon {grid.horizon} must exceed {after}")
    return (_finite("a", a), after, 0.0)


def _rows_occupation(grid, start, t, lo, hi):
    lo, hi = float(lo), float(hi)
    if math.isnan(lo) or math.isnan(hi) or not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo!r}, {hi!r})")
    return (_time(grid, t), lo, hi)


def _rows_lt_occ(grid, start, a, t, epsilon):
    return (_finite("a", a), _time(grid, t), _positive("epsilon", epsilon))


def _rows_tanaka(grid, start, a, t):
    if start != 0.0:
        raise PreconditionError("Tanaka's formula needs a path started at 0")
    return (_finite("a", a), _time(grid, t), 0.0)


def _rows_qv(grid, start, t):
    t = _time(grid, t)
    if grid.index_of(t) is None:
        raise PreconditionError(f"quadratic variation needs a grid time, got {t!r}")
    return (t, 0.0, 0.0)


def _rows_modulus(grid, start, delta):
    delta = float(delta)
    if not 0 < delta < 1:
        # g(1) = 0, so delta = 1 has no finite ratio
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    if delta < grid.dt * (1 - GRID_TOL):
        raise DomainError(f"delta {delta!r} is below the grid step {grid.dt!r}")
    return (delta, 0.0, 0.0)


def _rows_roughness(grid, start):
    if grid.steps < 4:
        raise PreconditionError("roughness needs at least 4 grid steps")
    return (0.0, 0.0, 0.0)


def _rows_zero_measure(grid, start, epsilon):
    return (_positive("epsilon", epsilon), 0.0, 0.0)


def _rows_sign_change(grid, start, delta):
    if start != 0.0:
        raise PreconditionError("sign_change_by needs a path started at 0")
    delta = float(delta)
    if not grid.dt * (1 - GRID_TOL) <= delta <= grid.horizon:
        raise DomainError(f"delta must lie in [{grid.dt!r}, {grid.horizon!r}], got {delta!r}")
    return (delta, 0.0, 0.0)


# name -> (kernel code, parameter names, row builder)
REGISTRY: dict[str, tuple[int, tuple[str, ...], Callable]] = {
    "value_at": (0, ("t",), _rows_value_at),
    "running_max": (1, ("t",), _rows_value_at),
    "first_hitting_time": (2, ("a",), _rows_first_hit),
    "last_zero_before": (3, ("t",), _rows_value_at),
    "truncated_hitting_time": (4, ("a", "after"), _rows_trunc),
    "occupation_time": (5, ("t", "lo", "hi"), _rows_occupation),
    "local_time_occupation": (6, ("a", "t", "epsilon"), _rows_lt_occ),
    "local_time_tanaka": (7, ("a", "t"), _rows_tanaka),
    "quadratic_variation": (8, ("t",), _rows_qv),
    "modulus_statistic": (9, ("delta",), _rows_modulus),
    "roughness_statistic": (10, (), _rows_roughness),
    "zero_measure_estimate": (11, ("epsilon",), _rows_zero_measure),
    "sign_change_by": (12, ("delta",), _rows_sign_change),
}

# results that may be CENSORED (hitting) or NONE (last zero)
MAYBE_MISSING = frozenset({"first_hitting_time", "last_zero_before", "truncated_hitting_time"})


@dataclass(frozen=True)
class Functional:
    """A functional name with its parameters, e.g. ``Functional("running_max", {"t": 1})``."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise DomainError(f"unknown functional {self.name!r}")
        names = REGISTRY[self.name][1]
        extra = sorted(set(self.params) - set(names))
        if extra:
            raise DomainError(f"{self.name}: unexpected parameters {extra}")

    @classmethod
    def of(cls, name: str, **params) -> "Functional":
        return cls(name, dict(params))

    def row(self, grid: TimeGrid, start_value: float) -> tuple[float, float, float, float]:
        code, _, build = REGISTRY[self.name]
        try:
            p = build(grid, start_value, **self.params)
        except TypeError as exc:
            raise DomainError(f"{self.name}: {exc}") from None
        return (float(code),) + tuple(float(x) for x in p)

    def label(self) -> str:
        """Stable parameter text, ``a=1;t=0.5``, used in CSV exports."""
        return ";".join(f"{k}={format(float(v), '.17g')}" for k, v in sorted(self.params.items()))


def request_rows(functionals: Sequence[Functional], spec) -> np.ndarray:
    """Validated kernel request array of shape ``(len(functionals), 4)``."""
    rows = [f.row(spec.grid, spec.start_value) for f in functionals]
    return np.ascontiguousarray(np.array(rows, dtype=np.float64).reshape(-1, 4))


def evaluate_path(path: Path, functionals: Sequence[Functional]) -> np.ndarray:
    """Every functional on one path; CENSORED and NONE come back as NaN."""
    rows = [f.row(path.grid, path.start_value) for f in functionals]
    req = np.ascontiguousarray(np.array(rows, dtype=np.float64).reshape(-1, 4))
    return core.evaluate(path.values, path.grid.horizon, req)


def _one(path: Path, name: str, **params) -> float:
    return float(evaluate_path(path, [Functional(name, params)])[0])


def _maybe(x: float) -> float | None:
    return None if math.isnan(x) else x


# ---------------------------------------------------------------- operations

def running_max(path: Path, t: float) -> float:
    """Maximum of the interpolated path over ``[0, t]``."""
    return _one(path, "running_max", t=t)


def first_hitting_time(path: Path, a: float) -> HittingRecord:
    """First time the interpolated path equals ``a``.

    Segments are scanned left to right for a bracketing sign change of
    ``value - a``; the crossing inside the first such segment is solved
    linearly. A level equal to the start value gives time 0, flagged
    ``degenerate``.
    """
    t = _one(path, "first_hitting_time", a=a)
    return HittingRecord(float(a), _maybe(t), degenerate=float(a) == path.start_value)


def last_zero_before(path: Path, t: float) -> float | None:
    """Largest ``s <= t`` with interpolated value 0, or None if there is none."""
    return _maybe(_one(path, "last_zero_before", t=t))


def truncated_hitting_time(path: Path, a: float, after: float = 1.0) -> HittingRecord:
    """First crossing of ``a`` strictly after time ``after``; needs horizon > after."""
    return HittingRecord(float(a), _maybe(_one(path, "truncated_hitting_time", a=a, after=after)))


def occupation_time(path: Path, t: float, interval: tuple[float, float]) -> float:
    """Lebesgue measure of ``{s <= t : path(s) in (lo, hi)}``.

    Each linear segment contributes, in closed form, the length of the part
    of its time interval whose image falls inside ``(lo, hi)``.
    """
    lo, hi = interval
    return _one(path, "occupation_time", t=t, lo=lo, hi=hi)


def local_time_occupation(path: Path, a: float, t: float, epsilon: float) -> LocalTimeEstimate:
    """``occupation_time(path, t, (a - eps, a + eps)) / (2 eps)``."""
    value = _one(path, "local_time_occupation", a=a, t=t, epsilon=epsilon)
    return LocalTimeEstimate(float(a), float(t), float(epsilon), value, "occupation")


def local_time_tanaka(path: Path, a: float, t: float) -> LocalTimeEstimate:
    """``|B(t) - a| - |a| - sum sgn(B(t_k) - a) (B(t_{k+1}) - B(t_k))``.

    Left-endpoint sums with ``sgn(0) = 0``; a final partial segment up to a
    non-grid ``t`` is included. Small negative values are reported as computed.
    """
    value = _one(path, "local_time_tanaka", a=a, t=t)
    return LocalTimeEstimate(float(a), float(t), None, value, "tanaka")


def quadratic_variation(path: Path, t: float) -> float:
    """Sum of squared increments over grid steps up to the grid time ``t``."""
    return _one(path, "quadratic_variation", t=t)


def modulus_statistic(path: Path, delta: float) -> float:
    """Largest oscillation over windows of length ``delta``, divided by
    ``sqrt(2 delta log(1/delta))``. Needs ``dt <= delta < 1``.
    """
    return _one(path, "modulus_statistic", delta=delta)


def roughness_statistic(path: Path) -> float:
    """``min_k max_{j=k..k+2} |v[j] - v[j-1]| / dt``."""
    return _one(path, "roughness_statistic")


def zero_measure_estimate(path: Path, epsilon: float) -> float:
    """Occupation time of ``(-eps, eps)`` over the whole horizon."""
    return _one(path, "zero_measure_estimate", epsilon=epsilon)


def sign_change_by(path: Path, delta: float) -> bool:
    """True iff grid values in ``(0, delta]`` include both signs strictly."""
    return _one(path, "sign_change_by", delta=delta) == 1.0
