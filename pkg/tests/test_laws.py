import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from brownkit import laws
from brownkit.errors import DomainError

mpmath.mp.dps = 40


def phi_series(x):
    """Phi by the Taylor series of erf, summed at 40 digits."""
    z = mpmath.mpf(x) / mpmath.sqrt(2)
    term, total, k = z, mpmath.mpf(0), 0
    while True:
        add = term / (2 * k + 1)
        total += add
        if abs(add) < mpmath.mpf(10) ** -35:
            break
        k += 1
        term *= -z * z / k
    return float(mpmath.mpf(0.5) + total / mpmath.sqrt(mpmath.pi))


@pytest.mark.parametrize("x", [-8, -3.3, -1, -0.1, 0, 0.1, 0.5, 1, 2, 3, 5.5])
def test_normal_cdf_against_series_oracle(x):
    assert abs(laws.normal_cdf(x) - phi_series(x)) <= 1e-10


def test_normal_cdf_examples():
    assert laws.normal_cdf(0) == 0.5
    assert laws.normal_cdf(1) == pytest.approx(0.8413447461, abs=1e-10)
    for x in (0.1, 1, 3):
        assert laws.normal_cdf(-x) + laws.normal_cdf(x) == pytest.approx(1.0, abs=1e-15)
    # cross-check against quadrature of the density
    dens = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    assert 0.5 + integrate.quad(dens, 0, 1)[0] == pytest.approx(laws.normal_cdf(1), abs=1e-12)


def test_max_law_examples():
    assert laws.max_cdf_complement(1, 1) == pytest.approx(0.3173105078, abs=1e-10)
    assert laws.max_cdf_complement(1, 4) == pytest.approx(0.6170750774, abs=1e-10)
    assert laws.max_cdf_complement(1e3, 1) == 0.0
    for a, t in [(0, 1), (1, 0), (-1, 1)]:
        with pytest.raises(DomainError):
            laws.max_cdf_complement(a, t)


def test_reflection_examples():
    assert laws.reflection_joint_prob(1, 0, 1) == pytest.approx(0.0227501319, abs=1e-10)
    assert laws.reflection_joint_prob(1, 1 - 1e-9, 1) == pytest.approx(0.1586552539, abs=1e-8)
    assert laws.reflection_joint_prob(1, 0, 1e-6) < 1e-100
    with pytest.raises(DomainError):
        laws.reflection_joint_prob(1, 1, 1)


def test_reflection_monotone_on_mesh():
    a = np.linspace(0.1, 3, 20)
    for t in (0.5, 2.0):
        grid = np.array([[laws.reflection_joint_prob(ai, ai - d, t) if ai - d < ai else np.nan
                          for d in np.linspace(0.05, 4, 20)] for ai in a])
        # moving b up (smaller gap d) increases the probability
        assert np.all(np.diff(grid, axis=1) <= 0)
        for b in np.linspace(-3, 0.05, 20):
            col = [laws.reflection_joint_prob(ai, b, t) for ai in a if b < ai]
            assert np.all(np.diff(col) <= 0)


def test_hitting_examples_and_density_integral():
    assert laws.hitting_cdf(1, 1) == pytest.approx(0.3173105078, abs=1e-10)
    assert laws.hitting_density(1, 1) == pytest.approx(0.2419707245, abs=1e-10)
    assert laws.hitting_cdf(1, 1e-4) < 1e-100
    for a, T in [(1, 1), (1, 4), (2, 1)]:
        val = integrate.quad(lambda s: laws.hitting_density(a, s), 0, T, epsabs=1e-13)[0]
        assert val == pytest.approx(laws.hitting_cdf(a, T), abs=1e-6)
    with pytest.raises(DomainError):
        laws.hitting_density(1, 0)


def test_arcsine_examples_and_symmetry():
    assert laws.arcsine_cdf(0.5) == pytest.approx(0.5, abs=1e-15)
    assert laws.arcsine_cdf(1) == 1.0
    assert laws.arcsine_cdf(0.25) == pytest.approx(1 / 3, abs=1e-10)
    for s in (0.1, 0.3, 0.5):
        assert laws.arcsine_cdf(s) + laws.arcsine_cdf(1 - s) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        laws.arcsine_cdf(1.1)


def test_arcsine_by_heat_kernel_quadrature():
    # P(L <= s) = int p_s(0, x) P^x(tau_0 > 1 - s) dx
    for s in (0.2, 0.5, 0.9):
        def integrand(x):
            p = math.exp(-x * x / (2 * s)) / math.sqrt(2 * math.pi * s)
            return p * (1 - laws.hitting_cdf(abs(x), 1 - s))
        val = 2 * integrate.quad(integrand, 0, math.inf, epsabs=1e-12)[0]
        assert val == pytest.approx(laws.arcsine_cdf(s), abs=1e-8)


def test_truncated_hitting_density():
    assert laws.truncated_hitting_density(2) == pytest.approx(0.1591549431, abs=1e-10)
    assert laws.truncated_hitting_density(1.25) == pytest.approx(0.5092958179, abs=1e-10)
    assert laws.truncated_hitting_density(1e12) < 1e-17
    with pytest.raises(DomainError):
        laws.truncated_hitting_density(1.0)
    # t = 1 + u^2 removes the endpoint singularity
    total = integrate.quad(lambda u: 2 * u * laws.truncated_hitting_density(1 + u * u)
                           if u > 0 else 2 / math.pi, 0, math.inf, epsabs=1e-12)[0]
    assert total == pytest.approx(1.0, abs=1e-6)
    val = integrate.quad(laws.truncated_hitting_density, 1, 8, epsabs=1e-12, limit=200)[0]
    assert val == pytest.approx(laws.truncated_hitting_cdf(8), abs=1e-6)


def test_covariances():
    assert laws.bm_covariance(0.3, 0.7) == 0.3
    assert laws.bridge_covariance(0.5, 0.5) == 0.25
    for t in (0.0, 0.4, 1.0):
        assert laws.bridge_covariance(0, t) == 0 and laws.bridge_covariance(1, t) == 0


def test_kl_eigenpairs():
    lam1, phi1 = laws.kl_eigenpair(1)
    assert lam1 == pytest.approx(0.4052847346, abs=1e-10)
    for j in (1, 7, 50):
        assert laws.kl_eigenpair(j)[1](0.0) == 0.0
    with pytest.raises(DomainError):
        laws.kl_eigenpair(0)
    assert abs(laws.kl_trace(10 ** 6) - 0.5) <= 1e-6


def test_kl_orthonormality():
    n = 10 ** 4
    t = (np.arange(n) + 0.5) / n  # composite midpoint rule
    phis = np.array([laws.kl_eigenpair(j)[1](t) for j in range(1, 51)])
    gram = phis @ phis.T / n
    assert np.max(np.abs(gram - np.eye(50))) < 1e-8


def test_mercer_partial_sum():
    J = 10 ** 4
    lam = laws.kl_eigenvalues(J)
    j = np.arange(1, J + 1)
    phi = lambda t: math.sqrt(2) * np.sin((j - 0.5) * math.pi * t)
    assert abs(np.sum(lam * phi(0.3) * phi(0.7)) - 0.3) < 1e-3


def test_levy_modulus():
    assert laws.levy_modulus(1 / math.e) == pytest.approx(0.8577638850, abs=1e-10)
    assert laws.levy_modulus(0.01) == pytest.approx(0.3034854259, abs=1e-10)
    d = np.geomspace(1e-12, 1 / math.e, 50)
    ratio = [laws.levy_modulus(x) / math.sqrt(x) for x in d]
    assert np.all(np.diff(ratio) < 0)
    for bad in (0, 1, 2):
        with pytest.raises(DomainError):
            laws.levy_modulus(bad)


def test_registry_evaluate_and_ranges():
    r = laws.evaluate("arcsine_cdf", s=0.25)
    assert r.law_name == "arcsine_cdf" and r.value == pytest.approx(1 / 3)
    for name, (fn, params, kind) in laws.REGISTRY.items():
        if kind == "cdf":
            args = {"x": 0.3, "variance": 2.0, "a": 1.0, "t": 2.0, "b": 0.5, "T": 2.0, "s": 0.3}
            v = laws.evaluate(name, **{p: args[p] for p in params}).value
            assert 0.0 <= v <= 1.0
    with pytest.raises(DomainError):
        laws.evaluate("nope")
    with pytest.raises(DomainError):
        laws.evaluate("arcsine_cdf", s=0.1, q=2)
