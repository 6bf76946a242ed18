"""Compiled core vs numpy fallback on the hot kernels.

Run with ``python benchmarks/bench_kernels.py``. Prints seconds per call
(best of several repeats) and the speedup of the compiled core.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from brownkit import _pycore
from brownkit.functionals import Functional, request_rows
from brownkit.generators import GeneratorSpec, kernel_params
from brownkit.paths import TimeGrid

try:
    from brownkit import _core
except ImportError:
    _core = None


def cases(scale: int):
    n = 2 ** 16 * scale
    spec = GeneratorSpec("ExactIncrement", TimeGrid(1.0, 4096))
    code, params = kernel_params(spec)
    req = request_rows([Functional.of("running_max", t=1.0), Functional.of("quadratic_variation", t=1.0),
                        Functional.of("local_time_tanaka", a=0.0, t=1.0),
                        Functional.of("occupation_time", t=1.0, lo=-0.1, hi=0.1)], spec)
    path = _pycore.path_exact(1, 0, 2 ** 14, 1.0, 0.0)
    mod = np.array([[9, 2.0 ** -8, 0, 0]])
    return {
        f"gaussian_block {n}": lambda m: m.gaussian_block(1, 0, 0, n),
        f"path_exact {n}": lambda m: m.path_exact(1, 0, n, 1.0, 0.0),
        "modulus 2^14": lambda m: m.evaluate(path, 1.0, mod),
        f"ensemble 4x{50 * scale} paths": lambda m: m.ensemble(code, params, 1, 0, 50 * scale, req),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--scale", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    print(f"{'kernel':32s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, fn in cases(args.scale).items():
        py = min(timeit.repeat(lambda: fn(_pycore), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{name:32s} {py:10.4f}")
            continue
        c = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat))
        print(f"{name:32s} {py:10.4f} {c:11.4f} {py / c:7.1f}x")


if __name__ == "__main__":
    main()
