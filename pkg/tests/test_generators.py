import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from brownkit import laws
from brownkit.errors import SpecError
from brownkit.functionals import Functional as F
from brownkit.generators import (GeneratorSpec, Kind, empirical_process_path, generate,
                                 generate_bridge, generate_donsker, generate_dyadic,
                                 generate_empirical_process, generate_exact, generate_kl,
                                 kernel_params, partial_sum_path)
from brownkit.paths import Ensemble, TimeGrid
from brownkit.rng import StreamKey, gaussian_block, uniform_block

KEY = StreamKey(2024, 17)


def spec(kind, horizon=1.0, steps=16, **kw):
    return GeneratorSpec(kind, TimeGrid(horizon, steps), **kw)


# ---------------------------------------------------------------- exact increments

def test_exact_matches_running_sum_of_stream():
    s = spec("ExactIncrement", horizon=2.0, steps=100, start_value=0.25)
    p = generate_exact(s, KEY)
    g = gaussian_block(KEY, 0, 100)
    ref, acc = [0.25], 0.25
    for x in g:
        acc += math.sqrt(0.02) * x
        ref.append(acc)
    np.testing.assert_allclose(p.values, ref, rtol=0, atol=1e-13)
    assert p.values[0] == 0.25


def test_exact_moments():
    s = spec("ExactIncrement", steps=1024)
    r = Ensemble(s, 1, 10 ** 5).evaluate([F.of("value_at", t=1.0), F.of("value_at", t=0.3),
                                          F.of("value_at", t=0.7), F.of("value_at", t=0.5)])
    assert abs(np.var(r[:, 0], ddof=1) - 1.0) <= 0.02
    assert abs(np.cov(r[:, 1], r[:, 2])[0, 1] - laws.bm_covariance(0.3, 0.7)) <= 0.02
    # increments over [0, .5] and [.5, 1] are independent
    corr = np.corrcoef(r[:, 3], r[:, 0] - r[:, 3])[0, 1]
    assert abs(corr) <= 4 / math.sqrt(10 ** 5)


# ---------------------------------------------------------------- dyadic

def dyadic_oracle(key, level, horizon):
    n = 2 ** level
    g = gaussian_block(key, 0, n)
    v = [None] * (n + 1)
    v[0], v[n] = 0.0, 0.0 + math.sqrt(horizon) * g[0]
    for m in range(level):
        stride = n >> m
        sd = math.sqrt(horizon * 2.0 ** -(m + 2))
        for i in range(2 ** m):
            left = i * stride
            v[left + stride // 2] = 0.5 * (v[left] + v[left + stride]) + sd * g[2 ** m + i]
    return np.array(v)


def test_dyadic_level_zero_is_single_endpoint():
    p = generate_dyadic(spec("DyadicRefine", horizon=3.0, steps=1), KEY, 0)
    assert p.values[0] == 0.0
    assert p.values[1] == math.sqrt(3.0) * gaussian_block(KEY, 0, 1)[0]


def test_dyadic_midpoint_mean_with_zero_noise():
    # the conditional mean is the average of the neighbours
    z = 1.7
    assert 0.5 * (0.0 + z) + math.sqrt(0.25) * 0.0 == z / 2


def test_dyadic_matches_loop_oracle():
    for level in (1, 3, 8):
        p = generate_dyadic(spec("DyadicRefine", horizon=2.0, steps=2 ** level), KEY, level)
        assert np.array_equal(p.values, dyadic_oracle(KEY, level, 2.0))


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2 ** 64 - 1), stream=st.integers(0, 2 ** 64 - 1))
def test_dyadic_nesting_every_level_below_20(seed, stream):
    key = StreamKey(seed, stream)
    fine = generate_dyadic(spec("DyadicRefine", steps=2 ** 19), key, 19).values
    for m in range(19):
        coarse = generate_dyadic(spec("DyadicRefine", steps=2 ** m), key, m).values
        assert np.array_equal(fine[:: 2 ** (19 - m)], coarse)


def test_dyadic_half_variance():
    s = spec("DyadicRefine", steps=2 ** 10)
    x = Ensemble(s, 3, 10 ** 5).evaluate([F.of("value_at", t=0.5)])[:, 0]
    assert abs(np.var(x, ddof=1) - 0.5) <= 0.01


def test_dyadic_level_mismatch():
    with pytest.raises(SpecError):
        generate_dyadic(spec("DyadicRefine", steps=8), KEY, 2)
    with pytest.raises(SpecError):
        spec("DyadicRefine", steps=12)


# ---------------------------------------------------------------- Karhunen-Loeve

def test_kl_single_term():
    p = generate_kl(spec("KarhunenLoeve", steps=4, kl_terms=1), KEY)
    v1 = gaussian_block(KEY, 0, 1)[0]
    assert p.values[0] == 0.0
    assert p.values[-1] == pytest.approx(2 * math.sqrt(2) / math.pi * v1, rel=1e-14)
    assert math.sqrt(laws.kl_eigenvalue(1)) * math.sqrt(2) == pytest.approx(0.900316, abs=1e-6)


def test_kl_matches_direct_series():
    s = spec("KarhunenLoeve", steps=20, kl_terms=300)
    p = generate_kl(s, KEY)
    v = gaussian_block(KEY, 0, 300)
    ref = []
    for t in s.grid.times():
        terms = []
        for j in range(1, 301):
            lam, phi = laws.kl_eigenpair(j)
            terms.append(math.sqrt(lam) * v[j - 1] * float(phi(t)))
        ref.append(math.fsum(terms))
    np.testing.assert_allclose(p.values, ref, rtol=0, atol=1e-13)


def test_kl_variance_at_half():
    s = spec("KarhunenLoeve", steps=10, kl_terms=2000)
    x = Ensemble(s, 4, 5 * 10 ** 4).evaluate([F.of("value_at", t=0.5)])[:, 0]
    assert abs(np.var(x, ddof=1) - 0.5) <= 0.015


def test_kl_needs_unit_horizon():
    with pytest.raises(SpecError):
        spec("KarhunenLoeve", horizon=2.0, kl_terms=5)
    with pytest.raises(SpecError):
        spec("KarhunenLoeve", kl_terms=0)


# ---------------------------------------------------------------- Donsker

def test_partial_sum_hand_example():
    p = partial_sum_path([1, 1, -1, 1], TimeGrid(1.0, 4))
    assert p.values[2] == 1.0
    assert p.values[0] == 0.0


def test_donsker_coin_matches_explicit_walk():
    s = spec("DonskerPartialSum", horizon=2.0, steps=10, donsker_n=37, increment_law="coin")
    u = uniform_block(KEY, 0, 74)
    ref = partial_sum_path(np.where(u >= 0.5, 1.0, -1.0), TimeGrid(2.0, 10), n=37)
    np.testing.assert_allclose(generate_donsker(s, KEY).values, ref.values, atol=1e-14)


def test_donsker_normal_steps():
    s = spec("DonskerPartialSum", steps=8, donsker_n=8, increment_law="normal")
    ref = partial_sum_path(gaussian_block(KEY, 0, 8), TimeGrid(1.0, 8))
    np.testing.assert_allclose(generate_donsker(s, KEY).values, ref.values, atol=1e-14)


def test_donsker_clt():
    s = spec("DonskerPartialSum", steps=1, donsker_n=1024)
    z = Ensemble(s, 8, 5 * 10 ** 4).evaluate([F.of("value_at", t=1.0)])[:, 0]
    assert sps.kstest(z, "norm").statistic < 0.015


# ---------------------------------------------------------------- bridge and empirical process

def test_bridge_pinned_and_built_from_exact_path():
    p = generate_bridge(spec("BrownianBridge", steps=50), KEY)
    b = generate_exact(spec("ExactIncrement", steps=50), KEY).values
    assert p.values[0] == 0.0 and p.values[-1] == 0.0
    np.testing.assert_allclose(p.values, b - np.linspace(0, 1, 51) * b[-1], atol=1e-14)


def test_bridge_covariances():
    s = spec("BrownianBridge", steps=4)
    r = Ensemble(s, 9, 10 ** 5).evaluate([F.of("value_at", t=0.5), F.of("value_at", t=0.25),
                                          F.of("value_at", t=0.75)])
    assert abs(np.var(r[:, 0], ddof=1) - laws.bridge_covariance(0.5, 0.5)) <= 0.01
    assert abs(np.cov(r[:, 1], r[:, 2])[0, 1] - 0.0625) <= 0.01


def test_empirical_process_hand_example():
    g = TimeGrid(1.0, 10)
    p = empirical_process_path([0.2, 0.8], g)
    assert p.values[5] == pytest.approx(0.0, abs=1e-15)
    assert p.values[2] == pytest.approx(math.sqrt(2) * 0.3, abs=1e-12)
    assert p.values[0] == 0.0 and p.values[-1] == pytest.approx(0.0, abs=1e-15)


def test_empirical_process_matches_explicit_sample():
    s = spec("EmpiricalProcess", steps=64, sample_size=500)
    ref = empirical_process_path(uniform_block(KEY, 0, 500), s.grid)
    np.testing.assert_allclose(generate_empirical_process(s, KEY).values, ref.values, atol=1e-12)


def test_empirical_process_bridge_law():
    s = spec("EmpiricalProcess", steps=2, sample_size=10 ** 4)
    w = Ensemble(s, 10, 5 * 10 ** 4).evaluate([F.of("value_at", t=0.5)])[:, 0]
    assert sps.kstest(w, "norm", args=(0, 0.5)).statistic < 0.015


# ---------------------------------------------------------------- cross-construction

def test_constructions_share_the_endpoint_law():
    n = 5 * 10 ** 4
    ends = {}
    for i, s in enumerate([spec("ExactIncrement", steps=256), spec("DyadicRefine", steps=256),
                           spec("KarhunenLoeve", steps=4, kl_terms=2000)]):
        ends[s.kind] = Ensemble(s, 100 + i, n).evaluate([F.of("value_at", t=1.0)])[:, 0]
    kinds = list(ends)
    for a in range(3):
        for b in range(a + 1, 3):
            assert sps.ks_2samp(ends[kinds[a]], ends[kinds[b]]).statistic < 0.015


# ---------------------------------------------------------------- spec plumbing

def test_spec_round_trip_and_dispatch():
    for s in [spec("ExactIncrement", start_value=1.5), spec("DyadicRefine"),
              spec("KarhunenLoeve", kl_terms=7), spec("DonskerPartialSum", donsker_n=5),
              spec("BrownianBridge"), spec("EmpiricalProcess", sample_size=9)]:
        assert GeneratorSpec.from_dict(s.to_dict()) == s
        p = generate(s, KEY)
        assert p.values[0] == s.start_value
        kind, params = kernel_params(s)
        assert params["steps"] == s.grid.steps


@pytest.mark.parametrize("kw", [
    dict(kind="Nope"), dict(kind="BrownianBridge", horizon=2.0),
    dict(kind="EmpiricalProcess"), dict(kind="EmpiricalProcess", sample_size=3, base_distribution="normal"),
    dict(kind="DonskerPartialSum"), dict(kind="DonskerPartialSum", donsker_n=4, increment_law="cauchy"),
    dict(kind="ExactIncrement", start_value=math.nan),
])
def test_spec_validation(kw):
    kind = kw.pop("kind")
    with pytest.raises(SpecError):
        spec(kind, **kw)


def test_generator_rejects_other_kinds():
    with pytest.raises(SpecError):
        generate_kl(spec("ExactIncrement"), KEY)
    with pytest.raises(SpecError):
        GeneratorSpec.from_dict({"kind": "ExactIncrement", "grid": {"horizon": 1}})
    assert Kind("KarhunenLoeve") is Kind.KL
