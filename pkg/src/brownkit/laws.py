"""Closed-form laws of Brownian functionals, used as analytic oracles.

Scalar functions accept floats; the CDFs also accept numpy arrays so they can
be handed straight to the KS machinery in :mod:`brownkit.stats`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from brownkit.errors import DomainError

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LawEval:
    """A named law evaluated at named parameters."""

    law_name: str
    params: dict = field(default_factory=dict)
    value: float = math.nan


def _scaled(x, t):
    """``x / sqrt(t)``, staying scalar for scalar input."""
    if np.ndim(x) or np.ndim(t):
        return np.asarray(x, dtype=np.float64) / np.sqrt(t)
    return x / math.sqrt(t)


def _positive(name, x):
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"{name} must be positive, got {x!r}")


def normal_cdf(x):
    """Standard normal CDF, ``0.5 * erfc(-x / sqrt(2))``."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / _SQRT2)
    return 0.5 * special.erfc(-np.asarray(x, dtype=np.float64) / _SQRT2)


def normal_sf(x):
    """``1 - normal_cdf(x)`` without cancellation in the upper tail."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / _SQRT2)
    return 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / _SQRT2)


def max_cdf_complement(a, t):
    """P(max of B on [0, t] > a) = 2 (1 - Phi(a / sqrt t)), for a, t > 0."""
    _positive("a", a)
    _positive("t", t)
    return 2.0 * normal_sf(_scaled(a, t))


def reflection_joint_prob(a, b, t):
    """P(M(t) > a, B(t) < b) = 1 - Phi((2a - b) / sqrt t), for a > 0, b < a."""
    _positive("a", a)
    _positive("t", t)
    if np.any(np.asarray(b) >= np.asarray(a)):
        raise DomainError(f"need b < a, got a={a!r}, b={b!r}")
    return normal_sf(_scaled(2.0 * np.asarray(a) - b if np.ndim(a) else 2.0 * a - b, t))


def hitting_cdf(a, T):
    """P(tau_a <= T) for the first hitting time of level a > 0."""
    _positive("a", a)
    _positive("T", T)
    return 2.0 * normal_sf(_scaled(a, T))


def hitting_density(a, T):
    """Inverse Gaussian density ``a / sqrt(2 pi T^3) * exp(-a^2 / 2T)``."""
    _positive("a", a)
    _positive("T", T)
    a = np.asarray(a, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    out = a / np.sqrt(2.0 * math.pi * T ** 3) * np.exp(-a * a / (2.0 * T))
    return float(out) if out.ndim == 0 else out


def arcsine_cdf(s):
    """CDF of the last zero before 1: ``(2/pi) arcsin(sqrt s)`` on [0, 1]."""
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any((s_arr < 0) | (s_arr > 1)) or np.any(np.isnan(s_arr)):
        raise DomainError(f"s must lie in [0, 1], got {s!r}")
    out = (2.0 / math.pi) * np.arcsin(np.sqrt(s_arr))
    return float(out) if out.ndim == 0 else out


def truncated_hitting_density(t):
    """Density ``1 / (pi t sqrt(t - 1))`` of the first zero after time 1."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 1):
        raise DomainError(f"t must exceed 1, got {t!r}")
    out = 1.0 / (math.pi * t_arr * np.sqrt(t_arr - 1.0))
    return float(out) if out.ndim == 0 else out


def truncated_hitting_cdf(t):
    """P(first zero after 1 is <= t) = (2/pi) arctan(sqrt(t - 1)), t >= 1.

    Antiderivative of :func:`truncated_hitting_density`; used to integrate it
    over histogram bins.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 1):
        raise DomainError(f"t must be at least 1, got {t!r}")
    out = (2.0 / math.pi) * np.arctan(np.sqrt(t_arr - 1.0))
    return float(out) if out.ndim == 0 else out


def bm_covariance(s, t):
    if s < 0 or t < 0:
        raise DomainError("times must be nonnegative")
    return min(s, t)


def bridge_covariance(s, t):
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise DomainError("bridge times must lie in [0, 1]")
    return min(s, t) - s * t


def kl_eigenvalue(j):
    return 4.0 / ((2 * j - 1) ** 2 * math.pi ** 2)


def kl_eigenpair(j: int) -> tuple[float, Callable]:
    """Eigenvalue and eigenfunction ``sqrt2 sin((j - 1/2) pi t)`` of min(s, t) on [0, 1]."""
    if int(j) != j or j < 1:
        raise DomainError(f"j must be an integer >= 1, got {j!r}")
    j = int(j)
    freq = (j - 0.5) * math.pi

    def phi(t):
        return _SQRT2 * np.sin(freq * np.asarray(t, dtype=np.float64))

    return kl_eigenvalue(j), phi


def kl_eigenvalues(terms: int) -> np.ndarray:
    """``lambda_1 .. lambda_terms`` as an array."""
    j = np.arange(1, terms + 1, dtype=np.float64)
    return 4.0 / ((2.0 * j - 1.0) ** 2 * math.pi ** 2)


def kl_trace(terms: int) -> float:
    """Partial sum of the eigenvalues; tends to 1/2."""
    return math.fsum(kl_eigenvalues(terms)[::-1])


def levy_modulus(delta):
    """``sqrt(2 delta log(1/delta))`` for delta in (0, 1)."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return math.sqrt(2.0 * delta * math.log(1.0 / delta))


def gaussian_cdf(x, variance=1.0):
    """CDF of N(0, variance)."""
    _positive("variance", variance)
    return normal_cdf(_scaled(x, variance))


# name -> (callable, parameter names, kind). kind drives range checks and CSV export.
REGISTRY = {
    "normal_cdf": (normal_cdf, ("x",), "cdf"),
    "gaussian_cdf": (gaussian_cdf, ("x", "variance"), "cdf"),
    "max_cdf_complement": (max_cdf_complement, ("a", "t"), "cdf"),
    "reflection_joint_prob": (reflection_joint_prob, ("a", "b", "t"), "cdf"),
    "hitting_cdf": (hitting_cdf, ("a", "T"), "cdf"),
    "hitting_density": (hitting_density, ("a", "T"), "density"),
    "arcsine_cdf": (arcsine_cdf, ("s",), "cdf"),
    "truncated_hitting_density": (truncated_hitting_density, ("t",), "density"),
    "truncated_hitting_cdf": (truncated_hitting_cdf, ("t",), "cdf"),
    "bm_covariance": (bm_covariance, ("s", "t"), "value"),
    "bridge_covariance": (bridge_covariance, ("s", "t"), "value"),
    "kl_eigenvalue": (lambda j: kl_eigenpair(j)[0], ("j",), "value"),
    "levy_modulus": (levy_modulus, ("delta",), "value"),
}


def evaluate(law_name: str, **params) -> LawEval:
    """Evaluate a registered law by name with keyword parameters."""
    try:
        fn, names, _ = REGISTRY[law_name]
    except KeyError:
        raise DomainError(f"unknown law {law_name!r}") from None
    missing = [n for n in names if n not in params and n != "variance"]
    extra = sorted(set(params) - set(names))
    if missing or extra:
        raise DomainError(f"{law_name}: missing {missing}, unexpected {extra}")
    value = float(fn(**{k: float(v) for k, v in params.items()}))
    return LawEval(law_name, dict(params), value)
