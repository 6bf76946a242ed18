import json
import os
import subprocess
import sys

import numpy as np
import pytest

from brownkit import functionals as fn
from brownkit.generators import GeneratorSpec, kernel_params
from brownkit.paths import TimeGrid

from conftest import BACKENDS

pytestmark = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled core not built")

SPECS = [
    GeneratorSpec("ExactIncrement", TimeGrid(2.0, 300), start_value=0.5),
    GeneratorSpec("DyadicRefine", TimeGrid(1.0, 256)),
    GeneratorSpec("KarhunenLoeve", TimeGrid(1.0, 64), kl_terms=40),
    GeneratorSpec("DonskerPartialSum", TimeGrid(1.0, 100), donsker_n=250),
    GeneratorSpec("DonskerPartialSum", TimeGrid(1.0, 50), donsker_n=50, increment_law="normal"),
    GeneratorSpec("BrownianBridge", TimeGrid(1.0, 128)),
    GeneratorSpec("EmpiricalProcess", TimeGrid(1.0, 40), sample_size=500),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind.value}-{s.increment_law}")
def test_paths_bit_identical(spec):
    py, c = BACKENDS
    code, params = kernel_params(spec)
    for stream in (0, 5, 2 ** 40):
        a = py._generate(code, params, 99, stream)
        b = _compiled_path(c, code, params, stream)
        assert np.array_equal(a, b)


def _compiled_path(c, code, params, stream):
    # a VALUE_AT request at every grid time recovers the whole path from the batch kernel
    h, n = params["horizon"], params["steps"]
    req = np.array([[0, h * k / n, 0, 0] for k in range(n + 1)], dtype=np.float64)
    return c.ensemble(code, params, 99, stream, 1, req)[0]


def test_ensemble_parity_with_functionals():
    py, c = BACKENDS
    spec = GeneratorSpec("ExactIncrement", TimeGrid(1.0, 512))
    fs = [fn.Functional.of("first_hitting_time", a=0.7), fn.Functional.of("running_max", t=1.0),
          fn.Functional.of("occupation_time", t=1.0, lo=0.0, hi=0.3),
          fn.Functional.of("local_time_tanaka", a=0.1, t=1.0), fn.Functional.of("quadratic_variation", t=1.0),
          fn.Functional.of("modulus_statistic", delta=0.05), fn.Functional.of("last_zero_before", t=1.0)]
    req = fn.request_rows(fs, spec)
    code, params = kernel_params(spec)
    a = py.ensemble(code, params, 3, 10, 40, req)
    b = c.ensemble(code, params, 3, 10, 40, req)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
    assert np.array_equal(np.isnan(a), np.isnan(b))


def test_environment_forces_python_fallback():
    script = ("import json, brownkit; from brownkit.rng import gaussian_block, StreamKey;"
              "print(json.dumps([brownkit.BACKEND, gaussian_block(StreamKey(4, 2), 0, 5).tolist()]))")
    out = {}
    for mode in ("python", ""):
        env = dict(os.environ, BROWNKIT_BACKEND=mode)
        res = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        out[mode] = json.loads(res.stdout)
    assert out["python"][0] == "python" and out[""][0] != "python"
    assert out["python"][1] == out[""][1]
