"""Monte Carlo verification: empirical CDFs, Kolmogorov-Smirnov tests,
moment estimates and the reports that record them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from brownkit.errors import DomainError

# asymptotic Kolmogorov critical values c(alpha)
KS_CRITICAL = {0.05: 1.358, 0.01: 1.628}
KS_MIN_N = 50


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistical check.

    For KS tests ``passed`` is ``statistic <= threshold``; for moment tests
    ``statistic`` is ``|estimate - target|`` and ``threshold`` the tolerance.
    """

    __test__ = False  # not a pytest class

    test_name: str
    sample_size: int
    statistic: float
    threshold: float
    passed: bool
    master_seed: int | None = None
    generator_spec: dict | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=False, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("sample must be nonempty")
    if np.isnan(x).any():
        raise DomainError("sample contains NaN")
    return x


class ECDF:
    """Right-continuous empirical CDF ``F_n(t) = #{X_i <= t} / n``."""

    def __init__(self, sample):
        self._x = np.sort(_sample(sample))

    @property
    def n(self) -> int:
        return self._x.size

    def __call__(self, t):
        out = np.searchsorted(self._x, t, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out


def ecdf(sample) -> ECDF:
    return ECDF(sample)


def ks_statistic(sample, cdf: Callable) -> float:
    """``D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)``.

    Parameters
    ----------
    sample : array_like
        Observations; NaN is rejected.
    cdf : callable
        Vectorized CDF of the reference law.
    """
    x = np.sort(_sample(sample))
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64) * np.ones(n)
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_threshold(n: int, alpha: float) -> float:
    if alpha not in KS_CRITICAL:
        raise DomainError(f"alpha must be one of {sorted(KS_CRITICAL)}, got {alpha!r}")
    if n < KS_MIN_N:
        raise DomainError(f"asymptotic KS threshold needs n >= {KS_MIN_N}, got {n}")
    return KS_CRITICAL[alpha] / math.sqrt(n)


def ks_test(sample, cdf: Callable, alpha: float = 0.05, test_name: str = "ks",
            **meta) -> TestReport:
    """One-sample KS test at the asymptotic critical value ``c(alpha) / sqrt(n)``."""
    x = _sample(sample)
    threshold = ks_threshold(x.size, alpha)
    d = ks_statistic(x, cdf)
    notes = dict(meta.pop("notes", {}), alpha=alpha)
    return TestReport(test_name, int(x.size), d, threshold, d <= threshold, notes=notes, **meta)


def censored_ks_statistic(sample, cdf: Callable, horizon: float) -> tuple[float, float]:
    """KS distance for a sample censored at ``horizon``.

    NaN entries are censored. Observed values are compared with the
    sub-distribution on ``[0, horizon]`` renormalized by ``cdf(horizon)``.

    Returns
    -------
    statistic, censoring_rate
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("sample must be nonempty")
    seen = x[~np.isnan(x)]
    if seen.size == 0:
        raise DomainError("every observation is censored")
    mass = float(cdf(horizon))
    if not mass > 0:
        raise DomainError("reference law puts no mass before the horizon")
    d = ks_statistic(seen, lambda t: np.minimum(np.asarray(cdf(t)) / mass, 1.0))
    return d, 1.0 - seen.size / x.size


def mc_mean(sample) -> tuple[float, float]:
    """Sample mean and 95% normal half-width ``1.96 s / sqrt(n)``."""
    x = _sample(sample)
    if x.size < 2:
        raise DomainError("mc_mean needs at least two observations")
    return float(np.mean(x)), 1.96 * float(np.std(x, ddof=1)) / math.sqrt(x.size)


def moment_test(estimate: float, target: float, tolerance: float, test_name: str,
                sample_size: int, **meta) -> TestReport:
    """Report ``|estimate - target| <= tolerance``."""
    dev = abs(float(estimate) - float(target))
    notes = dict(meta.pop("notes", {}), estimate=float(estimate), target=float(target))
    return TestReport(test_name, int(sample_size), dev, float(tolerance), dev <= tolerance,
                      notes=notes, **meta)


def summary_csv(reports) -> str:
    """Suite summary rows ``test_name,statistic,threshold,passed``."""
    lines = ["test_name,statistic,threshold,passed"]
    for r in reports:
        lines.append(f"{r.test_name},{format(r.statistic, '.17g')},"
                     f"{format(r.threshold, '.17g')},{str(bool(r.passed)).lower()}")
    return "\n".join(lines) + "\n"
