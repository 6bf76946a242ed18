"""One-off calibration of the frozen Monte Carlo thresholds.

Runs independently of brownkit: numpy's PCG64 generator and direct
numpy implementations of the statistics. Writes calibration.json next
to this file. The acceptance suite uses the frozen numbers recorded there.

    python3 calibration/calibrate.py
"""

from __future__ import annotations

import json
import math
import pathlib

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

SEED = 20240611
OUT = pathlib.Path(__file__).with_name("calibration.json")


def bm(rng, n, count):
    """count x (n+1) Brownian paths on [0, 1]."""
    out = np.zeros((count, n + 1))
    np.cumsum(rng.standard_normal((count, n)) / math.sqrt(n), axis=1, out=out[:, 1:])
    return out


def modulus(v, delta):
    n = v.size - 1
    w = int(round(delta * n))
    win = sliding_window_view(v, w + 1)
    return float(np.max(win.max(axis=1) - win.min(axis=1))) / math.sqrt(2 * delta * math.log(1 / delta))


def roughness(v):
    n = v.size - 1
    d = np.abs(np.diff(v))
    return float(np.min(sliding_window_view(d, 3).max(axis=1))) * n


def occupation(v, lo, hi):
    """Time in (lo, hi) for a path on [0, 1], segment by segment."""
    n = v.size - 1
    p, q = v[:-1], v[1:]
    a, b = np.minimum(p, q), np.maximum(p, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = (np.minimum(hi, b) - np.maximum(lo, a)) / (b - a)
    frac = np.clip(np.nan_to_num(frac, nan=0.0), 0.0, 1.0)
    return float(frac.sum()) / n


def tanaka(v, a):
    s = np.sign(v[:-1] - a) * np.diff(v)
    return abs(v[-1] - a) - abs(a) - float(s.sum())


def main():
    rng = np.random.default_rng(SEED)
    result = {"seed": SEED, "generator": "numpy PCG64"}

    # modulus at n = 2**20, delta = 2**-14
    n, delta, count = 2 ** 20, 2.0 ** -14, 400
    mods = []
    for _ in range(count // 20):
        for v in bm(rng, n, 20):
            mods.append(modulus(v, delta))
    mods = np.array(mods)
    q = np.quantile(mods, [0.005, 0.05, 0.5, 0.95, 0.995])
    lower = min(0.8, math.floor(q[0] * 20) / 20)
    upper = max(1.15, math.ceil(q[-1] * 20) / 20)
    result["modulus"] = {
        "n": n, "delta": delta, "paths": count,
        "quantiles": dict(zip(["0.005", "0.05", "0.5", "0.95", "0.995"], q.tolist())),
        "fraction_in_0.8_1.15": float(np.mean((mods >= 0.8) & (mods <= 1.15))),
        "frozen_band": [lower, upper],
        "fraction_in_frozen_band": float(np.mean((mods >= lower) & (mods <= upper))),
    }

    # roughness at n = 2**16
    n, count = 2 ** 16, 10_000
    rough = []
    for _ in range(count // 250):
        rough.extend(roughness(v) for v in bm(rng, n, 250))
    rough = np.array(rough)
    q = np.quantile(rough, [0.0005, 0.001, 0.01, 0.5, 0.99])
    threshold = math.floor(q[1] * 10) / 10
    result["roughness"] = {
        "n": n, "paths": count,
        "quantiles": dict(zip(["0.0005", "0.001", "0.01", "0.5", "0.99"], q.tolist())),
        "max": float(rough.max()),
        "fraction_above_50": float(np.mean(rough > 50)),
        "frozen_threshold": threshold,
        "fraction_above_frozen": float(np.mean(rough > threshold)),
    }

    # local-time cross-check at n = 2**16, eps = 2**-6
    n, count, eps = 2 ** 16, 1000, 2.0 ** -6
    diffs = []
    for _ in range(count // 250):
        for v in bm(rng, n, 250):
            diffs.append(abs(tanaka(v, 0.0) - occupation(v, -eps, eps) / (2 * eps)))
    diffs = np.array(diffs)
    result["local_time"] = {
        "n": n, "paths": count, "epsilon": eps,
        "mean_abs_difference": float(diffs.mean()),
        "standard_error": float(diffs.std(ddof=1) / math.sqrt(count)),
    }

    OUT.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(result, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
