# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: counter-based RNG, path generators and path functionals.

Mirrors :mod:`brownkit._pycore` function for function. Inputs are assumed
validated by the public modules; nothing here raises on bad parameters.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, floor, fabs, ldexp, NAN, INFINITY
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from "_kernels.h":
    void bk_philox2(uint64_t k0, uint64_t k1, uint64_t b, uint64_t d, uint64_t s,
                    uint64_t *o) nogil
    void bk_log_batch(const double *x, double *out, int n) nogil
    void bk_sincos_batch(const double *a, double *co, double *si, int n) nogil
    void bk_fill(uint64_t seed, uint64_t domain, uint64_t stream, uint64_t start,
                 double *out, Py_ssize_t count, int gaussian) nogil


cdef enum:
    DOMAIN_GAUSSIAN = 0
    DOMAIN_UNIFORM = 1

# functional request codes, shared with _pycore and functionals.py
cdef enum:
    F_VALUE_AT = 0
    F_RUNNING_MAX = 1
    F_FIRST_HIT = 2
    F_LAST_ZERO = 3
    F_TRUNC_HIT = 4
    F_OCCUPATION = 5
    F_LOCAL_TIME_OCC = 6
    F_LOCAL_TIME_TANAKA = 7
    F_QV = 8
    F_MODULUS = 9
    F_ROUGHNESS = 10
    F_ZERO_MEASURE = 11
    F_SIGN_CHANGE = 12

# generator kinds
cdef enum:
    G_EXACT = 0
    G_DYADIC = 1
    G_KL = 2
    G_DONSKER = 3
    G_BRIDGE = 4
    G_EMPIRICAL = 5

BACKEND = "compiled"


# ---------------------------------------------------------------- RNG

cdef inline void _fill_uniform(uint64_t seed, uint64_t stream, uint64_t start,
                               double *out, Py_ssize_t count) noexcept nogil:
    bk_fill(seed, DOMAIN_UNIFORM, stream, start, out, count, 0)


cdef inline void _fill_gaussian(uint64_t seed, uint64_t stream, uint64_t start,
                                double *out, Py_ssize_t count) noexcept nogil:
    bk_fill(seed, DOMAIN_GAUSSIAN, stream, start, out, count, 1)


def philox4x64(uint64_t k0, uint64_t k1, uint64_t c0, uint64_t c1, uint64_t c2):
    """Philox4x64-10 block for counter ``(c0, c1, c2, 0)``."""
    cdef uint64_t out[8]
    bk_philox2(k0, k1, c0, c1, c2, out)
    return (out[0], out[1], out[2], out[3])


def unit_log(double[::1] x):
    cdef cnp.ndarray[double] out = np.empty(x.shape[0], dtype=np.float64)
    if x.shape[0]:
        bk_log_batch(&x[0], &out[0], <int>x.shape[0])
    return out


def sincos_turns(double[::1] x):
    cdef cnp.ndarray[double] c = np.empty(x.shape[0], dtype=np.float64)
    cdef cnp.ndarray[double] s = np.empty(x.shape[0], dtype=np.float64)
    if x.shape[0]:
        bk_sincos_batch(&x[0], &c[0], &s[0], <int>x.shape[0])
    return c, s


def gaussian_block(uint64_t seed, uint64_t stream, uint64_t start, Py_ssize_t count):
    cdef cnp.ndarray[double] out = np.empty(count, dtype=np.float64)
    with nogil:
        _fill_gaussian(seed, stream, start, &out[0] if count else NULL, count)
    return out


def uniform_block(uint64_t seed, uint64_t stream, uint64_t start, Py_ssize_t count):
    cdef cnp.ndarray[double] out = np.empty(count, dtype=np.float64)
    with nogil:
        _fill_uniform(seed, stream, start, &out[0] if count else NULL, count)
    return out


# ---------------------------------------------------------------- grid helpers

cdef inline double _tk(Py_ssize_t k, Py_ssize_t n, double horizon) noexcept nogil:
    return (<double>k * horizon) / <double>n


cdef inline Py_ssize_t _locate(double t, Py_ssize_t n, double horizon) noexcept nogil:
    # largest k with t_k <= t
    cdef Py_ssize_t k = <Py_ssize_t>floor(t / horizon * <double>n)
    if k < 0:
        k = 0
    if k > n:
        k = n
    while k < n and _tk(k + 1, n, horizon) <= t:
        k += 1
    while k > 0 and _tk(k, n, horizon) > t:
        k -= 1
    return k


cdef inline Py_ssize_t _floor_index(double x) noexcept nogil:
    # floor that forgives representation error just below an integer
    cdef double r = floor(x + 0.5)
    if fabs(x - r) <= 1e-9 * (1.0 if x < 1.0 else x):
        return <Py_ssize_t>r
    return <Py_ssize_t>floor(x)


# ---------------------------------------------------------------- generators

cdef void _gen_exact(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                     double x0, double *v) noexcept nogil:
    cdef double sdt = sqrt(horizon / <double>n)
    cdef Py_ssize_t k
    _fill_gaussian(seed, stream, 0, v + 1, n)
    v[0] = x0
    for k in range(n):
        v[k + 1] = v[k] + sdt * v[k + 1]


cdef void _gen_dyadic(uint64_t seed, uint64_t stream, int level, double horizon,
                      double x0, double *v, double *g) noexcept nogil:
    cdef Py_ssize_t n = (<Py_ssize_t>1) << level
    cdef Py_ssize_t stride, half, i, left, width
    cdef double sd
    cdef int m
    _fill_gaussian(seed, stream, 0, g, n)
    v[0] = x0
    v[n] = x0 + sqrt(horizon) * g[0]
    for m in range(level):
        width = (<Py_ssize_t>1) << m
        stride = n >> m
        half = stride >> 1
        sd = sqrt(ldexp(horizon, -(m + 2)))
        for i in range(width):
            left = i * stride
            v[left + half] = 0.5 * (v[left] + v[left + stride]) + sd * g[width + i]


cdef void _gen_kl(uint64_t seed, uint64_t stream, Py_ssize_t n, double x0,
                  const double *basis, const double *sqrt_lam, Py_ssize_t terms,
                  double *v, double *coef) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double s, c, y, t
    cdef const double *row
    _fill_gaussian(seed, stream, 0, coef, terms)
    for j in range(terms):
        coef[j] = sqrt_lam[j] * coef[j]
    for k in range(n + 1):
        row = basis + k * terms
        s = 0.0
        c = 0.0
        for j in range(terms):
            y = coef[j] * row[j] - c
            t = s + y
            c = (t - s) - y
            s = t
        v[k] = x0 + s


cdef void _gen_donsker(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                       double x0, Py_ssize_t steps, int coin, double *v,
                       double *inc) noexcept nogil:
    cdef Py_ssize_t k, idx, m, need
    cdef double root = sqrt(<double>steps)
    need = _floor_index(<double>steps * horizon)
    if coin:
        _fill_uniform(seed, stream, 0, inc + 1, need)
        for k in range(1, need + 1):
            inc[k] = 1.0 if inc[k] >= 0.5 else -1.0
    else:
        _fill_gaussian(seed, stream, 0, inc + 1, need)
    inc[0] = 0.0
    for k in range(1, need + 1):
        inc[k] = inc[k - 1] + inc[k]
    for k in range(n + 1):
        idx = _floor_index(<double>steps * <double>k * horizon / <double>n)
        if idx > need:
            idx = need
        v[k] = x0 + inc[idx] / root


cdef void _gen_bridge(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                      double x0, double *v) noexcept nogil:
    cdef Py_ssize_t k
    cdef double end
    _gen_exact(seed, stream, n, horizon, 0.0, v)
    end = v[n]
    for k in range(n + 1):
        v[k] = x0 + (v[k] - _tk(k, n, horizon) * end)


cdef void _gen_empirical(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                         double x0, Py_ssize_t size, double *v, double *u) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double x, root = sqrt(<double>size), acc
    _fill_uniform(seed, stream, 0, u, size)
    for k in range(n + 1):
        v[k] = 0.0
    for i in range(size):
        x = u[i]
        k = <Py_ssize_t>floor(x * <double>n)
        if k < 0:
            k = 0
        while k > 0 and _tk(k - 1, n, horizon) >= x:
            k -= 1
        while k < n and _tk(k, n, horizon) < x:
            k += 1
        if _tk(k, n, horizon) >= x:
            v[k] += 1.0
    acc = 0.0
    for k in range(n + 1):
        acc += v[k]
        v[k] = x0 + root * (acc / <double>size - _tk(k, n, horizon))


def path_exact(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon, double x0):
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    with nogil:
        _gen_exact(seed, stream, n, horizon, x0, &v[0])
    return v


def path_dyadic(uint64_t seed, uint64_t stream, int level, double horizon, double x0):
    cdef Py_ssize_t n = (<Py_ssize_t>1) << level
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double] g = np.empty(n, dtype=np.float64)
    with nogil:
        _gen_dyadic(seed, stream, level, horizon, x0, &v[0], &g[0])
    return v


def path_kl(uint64_t seed, uint64_t stream, double x0, const double[:, ::1] basis,
            const double[::1] sqrt_lam):
    cdef Py_ssize_t n = basis.shape[0] - 1, terms = basis.shape[1]
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double] coef = np.empty(terms, dtype=np.float64)
    with nogil:
        _gen_kl(seed, stream, n, x0, &basis[0, 0], &sqrt_lam[0], terms, &v[0], &coef[0])
    return v


def path_donsker(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                 double x0, Py_ssize_t steps, bint coin):
    cdef Py_ssize_t need = _floor_index(<double>steps * horizon)
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double] inc = np.empty(need + 1, dtype=np.float64)
    with nogil:
        _gen_donsker(seed, stream, n, horizon, x0, steps, coin, &v[0], &inc[0])
    return v


def path_bridge(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon, double x0):
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    with nogil:
        _gen_bridge(seed, stream, n, horizon, x0, &v[0])
    return v


def path_empirical(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                   double x0, Py_ssize_t size):
    cdef cnp.ndarray[double] v = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double] u = np.empty(max(size, 1), dtype=np.float64)
    with nogil:
        _gen_empirical(seed, stream, n, horizon, x0, size, &v[0], &u[0])
    return v


# ---------------------------------------------------------------- functionals

cdef double _value_at(const double *v, Py_ssize_t n, double horizon, double t) noexcept nogil:
    cdef Py_ssize_t k = _locate(t, n, horizon)
    cdef double tk = _tk(k, n, horizon), w
    if k == n or tk == t:
        return v[k]
    w = (t - tk) / (_tk(k + 1, n, horizon) - tk)
    return v[k] + w * (v[k + 1] - v[k])


cdef double _running_max(const double *v, Py_ssize_t n, double horizon, double t) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(t, n, horizon)
    cdef double best = v[0], end
    for k in range(1, m + 1):
        if v[k] > best:
            best = v[k]
    if m < n and _tk(m, n, horizon) < t:
        end = _value_at(v, n, horizon, t)
        if end > best:
            best = end
    return best


cdef inline double _cross(double t0, double t1, double v0, double v1, double a) noexcept nogil:
    cdef double t = t0 + (t1 - t0) * ((a - v0) / (v1 - v0))
    if t > t1:
        t = t1
    if t < t0:
        t = t0
    return t


cdef double _first_hit(const double *v, Py_ssize_t lo, Py_ssize_t hi, Py_ssize_t n,
                       double horizon, double a) noexcept nogil:
    # scan nodes lo+1..hi, reference side taken from v[0]
    cdef Py_ssize_t k
    cdef double d
    cdef bint above = v[0] > a
    if v[0] == a:
        return 0.0
    for k in range(lo + 1, hi + 1):
        d = v[k] - a
        if d == 0.0:
            return _tk(k, n, horizon)
        if (d > 0.0) != above:
            return _cross(_tk(k - 1, n, horizon), _tk(k, n, horizon), v[k - 1], v[k], a)
    return NAN


cdef double _trunc_hit(const double *v, Py_ssize_t n, double horizon, double a,
                       double after) noexcept nogil:
    return _trunc_prefix(v, n, n, horizon, a, after)


cdef double _last_zero(const double *v, Py_ssize_t n, double horizon, double t) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(t, n, horizon)
    cdef double tm = _tk(m, n, horizon), vt
    if m < n and tm < t:
        vt = _value_at(v, n, horizon, t)
        if vt == 0.0:
            return t
        if v[m] == 0.0:
            return tm
        if (v[m] > 0.0) != (vt > 0.0):
            return _cross(tm, t, v[m], vt, 0.0)
    k = m
    while k >= 0:
        if v[k] == 0.0:
            return _tk(k, n, horizon)
        if k > 0 and ((v[k - 1] > 0.0) != (v[k] > 0.0)) and v[k - 1] != 0.0:
            return _cross(_tk(k - 1, n, horizon), _tk(k, n, horizon), v[k - 1], v[k], 0.0)
        k -= 1
    return NAN


cdef inline double _frac_inside(double p, double q, double lo, double hi) noexcept nogil:
    cdef double vmin, vmax, over
    if p == q:
        return 1.0 if (lo < p and p < hi) else 0.0
    if p < q:
        vmin = p
        vmax = q
    else:
        vmin = q
        vmax = p
    over = (hi if hi < vmax else vmax) - (lo if lo > vmin else vmin)
    if over <= 0.0:
        return 0.0
    over = over / (vmax - vmin)
    return 1.0 if over > 1.0 else over


cdef double _occupation(const double *v, Py_ssize_t n, double horizon, double t,
                        double lo, double hi) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(t, n, horizon)
    cdef double tm = _tk(m, n, horizon), acc = 0.0, total = 0.0
    for k in range(m):
        acc += _frac_inside(v[k], v[k + 1], lo, hi)
    if m > 0:
        total = tm * (acc / <double>m)
    if m < n and tm < t:
        total += (t - tm) * _frac_inside(v[m], _value_at(v, n, horizon, t), lo, hi)
    return total


cdef inline double _sgn(double x) noexcept nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef double _tanaka(const double *v, Py_ssize_t n, double horizon, double a,
                    double t) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(t, n, horizon)
    cdef double s = 0.0, vt = _value_at(v, n, horizon, t)
    for k in range(m):
        s += _sgn(v[k] - a) * (v[k + 1] - v[k])
    if m < n and _tk(m, n, horizon) < t:
        s += _sgn(v[m] - a) * (vt - v[m])
    return fabs(vt - a) - fabs(a) - s


cdef double _qv(const double *v, Py_ssize_t n, double horizon, double t) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(t, n, horizon)
    cdef double s = 0.0, d
    for k in range(m):
        d = v[k + 1] - v[k]
        s += d * d
    return s


cdef double _window_range(const double *v, Py_ssize_t n, Py_ssize_t w) noexcept nogil:
    # max over k of (max - min) of v[k..k+w], monotone deques
    cdef Py_ssize_t *qmax
    cdef Py_ssize_t *qmin
    cdef Py_ssize_t hmax = 0, tmax = 0, hmin = 0, tmin = 0, i
    cdef double best = 0.0, r
    if w >= n:
        w = n
    qmax = <Py_ssize_t *>malloc((n + 1) * sizeof(Py_ssize_t))
    qmin = <Py_ssize_t *>malloc((n + 1) * sizeof(Py_ssize_t))
    for i in range(n + 1):
        while tmax > hmax and v[qmax[tmax - 1]] <= v[i]:
            tmax -= 1
        qmax[tmax] = i
        tmax += 1
        while tmin > hmin and v[qmin[tmin - 1]] >= v[i]:
            tmin -= 1
        qmin[tmin] = i
        tmin += 1
        if qmax[hmax] < i - w:
            hmax += 1
        if qmin[hmin] < i - w:
            hmin += 1
        r = v[qmax[hmax]] - v[qmin[hmin]]
        if r > best:
            best = r
    free(qmax)
    free(qmin)
    return best


cdef inline double _levy_g(double delta) noexcept nogil:
    return sqrt(2.0 * delta * log(1.0 / delta))


cdef double _modulus(const double *v, Py_ssize_t n, double horizon, double delta) noexcept nogil:
    cdef Py_ssize_t w = _floor_index(delta * <double>n / horizon)
    return _window_range(v, n, w) / _levy_g(delta)


cdef double _roughness(const double *v, Py_ssize_t n, double horizon) noexcept nogil:
    cdef double scale = <double>n / horizon, best = INFINITY, m, d
    cdef Py_ssize_t k, j
    for k in range(1, n - 1):
        m = 0.0
        for j in range(k, k + 3):
            d = fabs(v[j] - v[j - 1])
            if d > m:
                m = d
        if m < best:
            best = m
    return best * scale


cdef double _sign_change(const double *v, Py_ssize_t n, double horizon, double delta) noexcept nogil:
    cdef Py_ssize_t k, m = _locate(delta, n, horizon)
    cdef bint pos = False, neg = False
    for k in range(1, m + 1):
        if v[k] > 0.0:
            pos = True
        elif v[k] < 0.0:
            neg = True
        if pos and neg:
            return 1.0
    return 0.0


cdef double _evaluate(const double *v, Py_ssize_t n, double horizon, int code,
                      double p0, double p1, double p2) noexcept nogil:
    if code == F_VALUE_AT:
        return _value_at(v, n, horizon, p0)
    if code == F_RUNNING_MAX:
        return _running_max(v, n, horizon, p0)
    if code == F_FIRST_HIT:
        return _first_hit(v, 0, n, n, horizon, p0)
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
    return NAN


def evaluate(const double[::1] values, double horizon, const double[:, ::1] requests):
    """Evaluate every request row ``(code, p0, p1, p2)`` on one path."""
    cdef Py_ssize_t n = values.shape[0] - 1, r
    cdef cnp.ndarray[double] out = np.empty(requests.shape[0], dtype=np.float64)
    with nogil:
        for r in range(requests.shape[0]):
            out[r] = _evaluate(&values[0], n, horizon, <int>requests[r, 0],
                               requests[r, 1], requests[r, 2], requests[r, 3])
    return out


# ---------------------------------------------------------------- ensembles

cdef double _stream_hit(uint64_t seed, uint64_t stream, Py_ssize_t n, double horizon,
                        double x0, double *v, int code, double a, double after) noexcept nogil:
    # exact-increment path generated chunkwise, stopping once the hit is resolved
    cdef Py_ssize_t chunk = 4096, done = 0, todo, k, lo, j = 0, k_next = 0
    cdef double sdt = sqrt(horizon / <double>n), r, pt = 0.0, pv = 0.0, d, tj
    cdef int side = 0
    cdef bint started = False
    v[0] = x0
    if code == F_FIRST_HIT and x0 == a:
        return 0.0
    if code == F_TRUNC_HIT:
        j = _locate(after, n, horizon)
    while done < n:
        todo = chunk if n - done > chunk else n - done
        _fill_gaussian(seed, stream, <uint64_t>done, v + done + 1, todo)
        for k in range(done, done + todo):
            v[k + 1] = v[k] + sdt * v[k + 1]
        lo = done
        done += todo
        if code == F_FIRST_HIT:
            r = _first_hit(v, lo, done, n, horizon, a)
            if r == r:
                return r
            continue
        if not started:
            if done <= j:
                continue
            tj = _tk(j, n, horizon)
            pv = v[j] if tj == after else v[j] + ((after - tj) / (_tk(j + 1, n, horizon) - tj)) * (v[j + 1] - v[j])
            pt = after
            side = 1 if pv > a else (-1 if pv < a else 0)
            k_next = j + 1
            started = True
        for k in range(k_next, done + 1):
            d = v[k] - a
            if side == 0:
                if d == 0.0:
                    return after
                side = 1 if d > 0.0 else -1
            elif d == 0.0:
                return _tk(k, n, horizon)
            elif (d > 0.0) != (side > 0):
                return _cross(pt, _tk(k, n, horizon), pv, v[k], a)
            pt = _tk(k, n, horizon)
            pv = v[k]
        k_next = done + 1
    return NAN


cdef double _trunc_prefix(const double *v, Py_ssize_t m, Py_ssize_t n, double horizon,
                          double a, double after) noexcept nogil:
    # _trunc_hit restricted to nodes 0..m of an n-step grid; NaN if unresolved
    cdef Py_ssize_t k, j = _locate(after, n, horizon)
    cdef double pt, pv, d, tj = _tk(j, n, horizon), w
    cdef int side = 0
    if j >= m:
        return NAN
    if tj == after:
        pv = v[j]
    else:
        w = (after - tj) / (_tk(j + 1, n, horizon) - tj)
        pv = v[j] + w * (v[j + 1] - v[j])
    pt = after
    if pv > a:
        side = 1
    elif pv < a:
        side = -1
    for k in range(j + 1, m + 1):
        d = v[k] - a
        if side == 0:
            if d == 0.0:
                return after
            side = 1 if d > 0.0 else -1
        elif d == 0.0:
            return _tk(k, n, horizon)
        elif (d > 0.0) != (side > 0):
            return _cross(pt, _tk(k, n, horizon), pv, v[k], a)
        pt = _tk(k, n, horizon)
        pv = v[k]
    return NAN


def ensemble(int kind, dict params, uint64_t seed, uint64_t first, Py_ssize_t count,
             const double[:, ::1] requests):
    """Generate paths ``first .. first+count-1`` and evaluate ``requests`` on each.

    Returns an array of shape ``(count, len(requests))``.
    """
    cdef Py_ssize_t n = params["steps"]
    cdef double horizon = params["horizon"]
    cdef double x0 = params.get("start_value", 0.0)
    cdef int level = params.get("level", 0)
    cdef Py_ssize_t donsker_n = params.get("donsker_n", 1)
    cdef bint coin = params.get("coin", True)
    cdef Py_ssize_t sample_size = params.get("sample_size", 1)
    cdef const double[:, ::1] basis
    cdef const double[::1] sqrt_lam
    cdef Py_ssize_t terms = 1
    cdef Py_ssize_t nreq = requests.shape[0], i, r, scratch
    cdef cnp.ndarray[double, ndim=2] out = np.empty((count, nreq), dtype=np.float64)
    cdef cnp.ndarray[double] vbuf = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[double] sbuf
    cdef double *v = &vbuf[0]
    cdef double *s
    cdef int code0 = -1
    cdef bint streaming

    if kind == G_KL:
        basis = params["basis"]
        sqrt_lam = params["sqrt_lambda"]
        terms = basis.shape[1]
    scratch = n + 1
    if kind == G_KL:
        scratch = terms
    elif kind == G_DONSKER:
        scratch = _floor_index(<double>donsker_n * horizon) + 1
    elif kind == G_EMPIRICAL:
        scratch = max(sample_size, 1)
    sbuf = np.empty(scratch, dtype=np.float64)
    s = &sbuf[0]
    if nreq == 1:
        code0 = <int>requests[0, 0]
    streaming = kind == G_EXACT and (code0 == F_FIRST_HIT or code0 == F_TRUNC_HIT)

    with nogil:
        for i in range(count):
            if streaming:
                out[i, 0] = _stream_hit(seed, first + i, n, horizon, x0, v, code0,
                                        requests[0, 1], requests[0, 2])
                continue
            if kind == G_EXACT:
                _gen_exact(seed, first + i, n, horizon, x0, v)
            elif kind == G_DYADIC:
                _gen_dyadic(seed, first + i, level, horizon, x0, v, s)
            elif kind == G_KL:
                _gen_kl(seed, first + i, n, x0, &basis[0, 0], &sqrt_lam[0], terms, v, s)
            elif kind == G_DONSKER:
                _gen_donsker(seed, first + i, n, horizon, x0, donsker_n, coin, v, s)
            elif kind == G_BRIDGE:
                _gen_bridge(seed, first + i, n, horizon, x0, v)
            else:
                _gen_empirical(seed, first + i, n, horizon, x0, sample_size, v, s)
            for r in range(nreq):
                out[i, r] = _evaluate(v, n, horizon, <int>requests[r, 0],
                                      requests[r, 1], requests[r, 2], requests[r, 3])
    return out
