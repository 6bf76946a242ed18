"""Pure numpy fallback for :mod:`brownkit._core`.

Same functions, same signatures. RNG output and generated paths are
bit-identical to the compiled kernels; functionals agree to rounding.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

BACKEND = "python"

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = (1 << 64) - 1
_U32 = np.uint64(32)

DOMAIN_GAUSSIAN = 0
DOMAIN_UNIFORM = 1

(F_VALUE_AT, F_RUNNING_MAX, F_FIRST_HIT, F_LAST_ZERO, F_TRUNC_HIT, F_OCCUPATION,
 F_LOCAL_TIME_OCC, F_LOCAL_TIME_TANAKA, F_QV, F_MODULUS, F_ROUGHNESS,
 F_ZERO_MEASURE, F_SIGN_CHANGE) = range(13)

G_EXACT, G_DYADIC, G_KL, G_DONSKER, G_BRIDGE, G_EMPIRICAL = range(6)


# ---------------------------------------------------------------- RNG

def _mulhilo(a, m):
    mh, ml = m >> _U32, m & _MASK32
    ah, al = a >> _U32, a & _MASK32
    ll = al * ml
    lh = al * mh
    hl = ah * ml
    hh = ah * mh
    carry = ((ll >> _U32) + (lh & _MASK32) + (hl & _MASK32)) >> _U32
    hi = hh + (lh >> _U32) + (hl >> _U32) + carry
    return hi, a * m


def _philox_blocks(k0: int, k1: int, blocks, domain: int, stream: int):
    """Philox4x64-10 words for each block index, shape (len(blocks), 4)."""
    c0 = np.asarray(blocks, dtype=np.uint64)
    c1 = np.full_like(c0, np.uint64(domain))
    c2 = np.full_like(c0, np.uint64(stream))
    c3 = np.zeros_like(c0)
    with np.errstate(over="ignore"):
        for _ in range(10):
            hi0, lo0 = _mulhilo(c0, _M0)
            hi1, lo1 = _mulhilo(c2, _M1)
            c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
            k0 = (k0 + _W0) & _MASK64
            k1 = (k1 + _W1) & _MASK64
    return np.stack([c0, c1, c2, c3], axis=1)


def philox4x64(k0, k1, c0, c1, c2):
    """Philox4x64-10 block for counter ``(c0, c1, c2, 0)``."""
    with np.errstate(over="ignore"):
        w = _philox_blocks(k0, k1, [c0], c1, c2)[0]
    return tuple(int(x) for x in w)


def _unit(w):
    return ((w >> np.uint64(12)).astype(np.float64) + 0.5) * 2.220446049250313e-16


def unit_log(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    bits = x.view(np.uint64)
    ed = ((bits >> np.uint64(52)) | np.uint64(0x4330000000000000)).view(np.float64)
    m = ((bits & np.uint64(0x000FFFFFFFFFFFFF)) | np.uint64(0x3FE0000000000000)).view(np.float64)
    m = m * 1.4142135623730951
    fe = ((ed - 4503599627370496.0) - 1022.0) - 0.5
    s = (m - 1.0) / (m + 1.0)
    s2 = s * s
    p = np.full_like(s, 1.0 / 23.0)
    for d in (21.0, 19.0, 17.0, 15.0, 13.0, 11.0, 9.0, 7.0, 5.0, 3.0):
        p = p * s2 + 1.0 / d
    lm = 2.0 * (s + s * (s2 * p))
    return fe * 6.93147180369123816490e-01 + (lm + fe * 1.90821492927058770002e-10)


_SIN = ((1.0 / 1307674368000.0, 1), (1.0 / 6227020800.0, -1), (1.0 / 39916800.0, 1),
        (1.0 / 362880.0, -1), (1.0 / 5040.0, 1), (1.0 / 120.0, -1), (1.0 / 6.0, 1))
_COS = ((1.0 / 20922789888000.0, -1), (1.0 / 87178291200.0, 1), (1.0 / 479001600.0, -1),
        (1.0 / 3628800.0, 1), (1.0 / 40320.0, -1), (1.0 / 720.0, 1), (1.0 / 24.0, -1),
        (0.5, 1))


def sincos_turns(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    q = np.trunc(4.0 * a + 0.5)
    y = a - q * 0.25
    t = y * 6.283185307179586
    t2 = t * t
    ps = np.full_like(t, -1.0 / 355687428096000.0)
    for c, sign in _SIN:
        ps = ps * t2 + c if sign > 0 else ps * t2 - c
    sv = t - t * (t2 * ps)
    pc = np.full_like(t, 1.0 / 6402373705728000.0)
    for c, sign in _COS:
        pc = pc * t2 + c if sign > 0 else pc * t2 - c
    cv = 1.0 - t2 * pc
    qm = q - 4.0 * np.trunc(q * 0.25)
    odd = ((qm == 1.0) | (qm == 3.0)).astype(np.float64)
    cc = odd * sv + (1.0 - odd) * cv
    ss = odd * cv + (1.0 - odd) * sv
    co = np.where((qm == 1.0) | (qm == 2.0), -cc, cc)
    si = np.where(qm >= 2.0, -ss, ss)
    return co, si


def _fill(seed, domain, stream, start, count, gaussian):
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    first = start >> 2
    last = (start + count - 1) >> 2
    words = _philox_blocks(seed, 0, np.arange(first, last + 1, dtype=np.uint64),
                           domain, stream).reshape(-1)
    if gaussian:
        lg = unit_log(_unit(words[0::2]))
        c, s = sincos_turns(_unit(words[1::2]))
        r = np.sqrt(-2.0 * lg)
        z = np.empty(words.shape[0], dtype=np.float64)
        z[0::2] = r * c
        z[1::2] = r * s
    else:
        z = _unit(words)
    skip = start & 3
    return z[skip:skip + count]


def gaussian_block(seed, stream, start, count):
    return _fill(seed, DOMAIN_GAUSSIAN, stream, start, count, True)


def uniform_block(seed, stream, start, count):
    return _fill(seed, DOMAIN_UNIFORM, stream, start, count, False)


# ---------------------------------------------------------------- grid helpers

def _tk(k, n, horizon):
    return (k * horizon) / n


def _locate(t, n, horizon):
    k = min(max(int(math.floor(t / horizon * n)), 0), n)
    while k < n and _tk(k + 1, n, horizon) <= t:
        k += 1
    while k > 0 and _tk(k, n, horizon) > t:
        k -= 1
    return k


def _floor_index(x):
    x = np.asarray(x, dtype=np.float64)
    r = np.floor(x + 0.5)
    close = np.abs(x - r) <= 1e-9 * np.where(x < 1.0, 1.0, x)
    out = np.where(close, r, np.floor(x)).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def _grid_times(n, horizon):
    return (np.arange(n + 1, dtype=np.float64) * horizon) / n


# ---------------------------------------------------------------- generators

def path_exact(seed, stream, n, horizon, x0):
    sdt = math.sqrt(horizon / n)
    g = gaussian_block(seed, stream, 0, n)
    v = np.empty(n + 1, dtype=np.float64)
    v[0] = x0
    v[1:] = sdt * g
    return np.cumsum(v)


def path_dyadic(seed, stream, level, horizon, x0):
    n = 1 << level
    g = gaussian_block(seed, stream, 0, n)
    v = np.empty(n + 1, dtype=np.float64)
    v[0] = x0
    v[n] = x0 + math.sqrt(horizon) * g[0]
    for m in range(level):
        width = 1 << m
        stride = n >> m
        half = stride >> 1
        sd = math.sqrt(math.ldexp(horizon, -(m + 2)))
        left = np.arange(width) * stride
        v[left + half] = 0.5 * (v[left] + v[left + stride]) + sd * g[width:2 * width]
    return v


def path_kl(seed, stream, x0, basis, sqrt_lam):
    terms = basis.shape[1]
    coef = sqrt_lam * gaussian_block(seed, stream, 0, terms)
    s = np.zeros(basis.shape[0])
    c = np.zeros(basis.shape[0])
    for j in range(terms):
        y = coef[j] * basis[:, j] - c
        t = s + y
        c = (t - s) - y
        s = t
    return x0 + s


def path_donsker(seed, stream, n, horizon, x0, steps, coin):
    need = _floor_index(steps * horizon)
    inc = np.empty(need + 1, dtype=np.float64)
    inc[0] = 0.0
    if coin:
        u = uniform_block(seed, stream, 0, need)
        inc[1:] = np.where(u >= 0.5, 1.0, -1.0)
    else:
        inc[1:] = gaussian_block(seed, stream, 0, need)
    partial = np.cumsum(inc)
    k = np.arange(n + 1, dtype=np.float64)
    idx = np.minimum(_floor_index(float(steps) * k * horizon / n), need)
    return x0 + partial[idx] / math.sqrt(steps)


def path_bridge(seed, stream, n, horizon, x0):
    b = path_exact(seed, stream, n, horizon, 0.0)
    return x0 + (b - _grid_times(n, horizon) * b[n])


def path_empirical(seed, stream, n, horizon, x0, size):
    u = uniform_block(seed, stream, 0, size)
    k = np.clip(np.floor(u * n).astype(np.int64), 0, n)
    while True:
        down = (k > 0) & (_tk(np.maximum(k - 1, 0).astype(np.float64), n, horizon) >= u)
        if not down.any():
            break
        k[down] -= 1
    while True:
        up = (k < n) & (_tk(k.astype(np.float64), n, horizon) < u)
        if not up.any():
            break
        k[up] += 1
    keep = _tk(k.astype(np.float64), n, horizon) >= u
    counts = np.bincount(k[keep], minlength=n + 1).astype(np.float64)
    acc = np.cumsum(counts)
    return x0 + math.sqrt(size) * (acc / size - _grid_times(n, horizon))


# ---------------------------------------------------------------- functionals

def _value_at(v, n, horizon, t):
    k = _locate(t, n, horizon)
    tk = _tk(k, n, horizon)
    if k == n or tk == t:
        return float(v[k])
    w = (t - tk) / (_tk(k + 1, n, horizon) - tk)
    return float(v[k] + w * (v[k + 1] - v[k]))


def _running_max(v, n, horizon, t):
    m = _locate(t, n, horizon)
    best = float(np.max(v[:m + 1]))
    if m < n and _tk(m, n, horizon) < t:
        best = max(best, _value_at(v, n, horizon, t))
    return best


def _cross(t0, t1, v0, v1, a):
    t = t0 + (t1 - t0) * ((a - v0) / (v1 - v0))
    return min(max(t, t0), t1)


def _first_hit(v, n, horizon, a):
    if v[0] == a:
        return 0.0
    d = v[1:] - a
    above = v[0] > a
    hit = (d == 0.0) | ((d > 0.0) != above)
    if not hit.any():
        return math.nan
    k = int(np.argmax(hit)) + 1
    if v[k] == a:
        return _tk(k, n, horizon)
    return _cross(_tk(k - 1, n, horizon), _tk(k, n, horizon), v[k - 1], v[k], a)


def _trunc_hit(v, n, horizon, a, after):
    j = _locate(after, n, horizon)
    if j >= n:
        return math.nan
    pt, pv = after, _value_at(v, n, horizon, after)
    start = j + 1
    side = 1 if pv > a else (-1 if pv < a else 0)
    if side == 0:
        if v[start] == a:
            return after
        side = 1 if v[start] > a else -1
        pt, pv = _tk(start, n, horizon), float(v[start])
        start += 1
    if start > n:
        return math.nan
    d = v[start:] - a
    hit = (d == 0.0) | ((d > 0.0) != (side > 0))
    if not hit.any():
        return math.nan
    k = int(np.argmax(hit)) + start
    if v[k] == a:
        return _tk(k, n, horizon)
    if k > start:
        pt, pv = _tk(k - 1, n, horizon), float(v[k - 1])
    return _cross(pt, _tk(k, n, horizon), pv, float(v[k]), a)


def _last_zero(v, n, horizon, t):
    m = _locate(t, n, horizon)
    tm = _tk(m, n, horizon)
    if m < n and tm < t:
        vt = _value_at(v, n, horizon, t)
        if vt == 0.0:
            return t
        if v[m] == 0.0:
            return tm
        if (v[m] > 0.0) != (vt > 0.0):
            return _cross(tm, t, float(v[m]), vt, 0.0)
    w = v[:m + 1]
    zero = w == 0.0
    flip = np.zeros(m + 1, dtype=bool)
    flip[1:] = ((w[:-1] > 0.0) != (w[1:] > 0.0)) & (w[:-1] != 0.0)
    hit = zero | flip
    if not hit.any():
        return math.nan
    k = m - int(np.argmax(hit[::-1]))
    if zero[k]:
        return _tk(k, n, horizon)
    return _cross(_tk(k - 1, n, horizon), _tk(k, n, horizon), float(v[k - 1]), float(v[k]), 0.0)


def _frac_inside(p, q, lo, hi):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    vmin = np.minimum(p, q)
    vmax = np.maximum(p, q)
    flat = p == q
    with np.errstate(divide="ignore", invalid="ignore"):
        over = (np.minimum(hi, vmax) - np.maximum(lo, vmin)) / (vmax - vmin)
    over = np.where(over > 0.0, np.minimum(over, 1.0), 0.0)
    return np.where(flat, ((lo < p) & (p < hi)).astype(np.float64), over)


def _occupation(v, n, horizon, t, lo, hi):
    m = _locate(t, n, horizon)
    tm = _tk(m, n, horizon)
    total = 0.0
    if m > 0:
        acc = float(np.sum(_frac_inside(v[:m], v[1:m + 1], lo, hi)))
        total = tm * (acc / m)
    if m < n and tm < t:
        total += (t - tm) * float(_frac_inside(v[m], _value_at(v, n, horizon, t), lo, hi))
    return total


def _tanaka(v, n, horizon, a, t):
    m = _locate(t, n, horizon)
    vt = _value_at(v, n, horizon, t)
    s = float(np.sum(np.sign(v[:m] - a) * np.diff(v[:m + 1])))
    if m < n and _tk(m, n, horizon) < t:
        s += float(np.sign(v[m] - a)) * (vt - v[m])
    return abs(vt - a) - abs(a) - s


def _qv(v, n, horizon, t):
    m = _locate(t, n, horizon)
    d = np.diff(v[:m + 1])
    return float(np.dot(d, d))


def _levy_g(delta):
    return math.sqrt(2.0 * delta * math.log(1.0 / delta))


def _modulus(v, n, horizon, delta):
    w = min(_floor_index(delta * n / horizon), n)
    size = w + 1
    hi = maximum_filter1d(v, size=size, mode="nearest")
    lo = minimum_filter1d(v, size=size, mode="nearest")
    return float(np.max(hi - lo)) / _levy_g(delta)


def _roughness(v, n, horizon):
    d = np.abs(np.diff(v))
    block = np.maximum(np.maximum(d[:-2], d[1:-1]), d[2:])
    return float(np.min(block)) * (n / horizon)


def _sign_change(v, n, horizon, delta):
    m = _locate(delta, n, horizon)
    w = v[1:m + 1]
    return 1.0 if (w > 0.0).any() and (w < 0.0).any() else 0.0


def _evaluate(v, n, horizon, code, p0, p1, p2):
    if code == F_VALUE_AT:
        return _value_at(v, n, horizon, p0)
    if code == F_RUNNING_MAX:
        return _running_max(v, n, horizon, p0)
    if code == F_FIRST_HIT:
        return _first_hit(v, n, horizon, p0)
    if code == F_LAST_ZERO:
        return _last_zero(v, n, horizon, p0)
    if code == F_TRUNC_HIT:
        return _trunc_hit(v, n, horizon, p0, p1)
    if code == F_OCCUPATION:
        return _occupation(v, n, horizon, p0, p1, p2)
    if code == F_LOCAL_TIME_OCC:
        return _occupation(v, n, horizon, p1, p0 - p2, p0 + p2) / (2.0 * p2)
    if code == F_LOCAL_TIME_TANAKA:
        return _tanaka(v, n, horizon, p0, p1)
    if code == F_QV:
        return _qv(v, n, horizon, p0)
    if code == F_MODULUS:
        return _modulus(v, n, horizon, p0)
    if code == F_ROUGHNESS:
        return _roughness(v, n, horizon)
    if code == F_ZERO_MEASURE:
        return _occupation(v, n, horizon, horizon, -p0, p0)
    if code == F_SIGN_CHANGE:
        return _sign_change(v, n, horizon, p0)
    return math.nan


def evaluate(values, horizon, requests):
    """Evaluate every request row ``(code, p0, p1, p2)`` on one path."""
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[0] - 1
    req = np.asarray(requests, dtype=np.float64).reshape(-1, 4)
    return np.array([_evaluate(v, n, horizon, int(r[0]), r[1], r[2], r[3]) for r in req],
                    dtype=np.float64)


# ---------------------------------------------------------------- ensembles

def _generate(kind, params, seed, stream):
    n = params["steps"]
    horizon = params["horizon"]
    x0 = params.get("start_value", 0.0)
    if kind == G_EXACT:
        return path_exact(seed, stream, n, horizon, x0)
    if kind == G_DYADIC:
        return path_dyadic(seed, stream, params["level"], horizon, x0)
    if kind == G_KL:
        return path_kl(seed, stream, x0, params["basis"], params["sqrt_lambda"])
    if kind == G_DONSKER:
        return path_donsker(seed, stream, n, horizon, x0, params["donsker_n"],
                            params.get("coin", True))
    if kind == G_BRIDGE:
        return path_bridge(seed, stream, n, horizon, x0)
    return path_empirical(seed, stream, n, horizon, x0, params["sample_size"])


def ensemble(kind, params, seed, first, count, requests):
    """Generate paths ``first .. first+count-1`` and evaluate ``requests`` on each.

    Returns an array of shape ``(count, len(requests))``.
    """
    req = np.asarray(requests, dtype=np.float64).reshape(-1, 4)
    out = np.empty((count, req.shape[0]), dtype=np.float64)
    for i in range(count):
        v = _generate(kind, params, seed, first + i)
        out[i] = evaluate(v, params["horizon"], req)
    return out
