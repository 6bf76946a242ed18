/* Counter-based RNG and Box-Muller transform shared by the compiled kernels.
 *
 * Philox4x64-10 (Salmon et al. 2011), keyed by the master seed; the counter is
 * (block, domain, stream, 0). Every transcendental step is written with
 * +, -, *, /, sqrt and bit manipulation only, so _pycore.py reproduces the
 * output exactly. Build with -ffp-contract=off.
 */
#ifndef BROWNKIT_KERNELS_H
#define BROWNKIT_KERNELS_H

#include <stdint.h>
#include <string.h>
#include <math.h>
#include <stddef.h>
#define BK_M0 0xD2E7470EE14C6C93ULL
#define BK_M1 0xCA5A826395121157ULL
#define BK_W0 0x9E3779B97F4A7C15ULL
#define BK_W1 0xBB67AE8584CAA73BULL

static inline void bk_philox2(uint64_t k0, uint64_t k1, uint64_t b,
                              uint64_t d, uint64_t s, uint64_t *o)
{
    /* blocks b and b+1 interleaved for instruction-level parallelism */
    uint64_t a0 = b, a1 = d, a2 = s, a3 = 0;
    uint64_t e0 = b + 1, e1 = d, e2 = s, e3 = 0;
    for (int r = 0; r < 10; ++r) {
        unsigned __int128 pa0 = (unsigned __int128)BK_M0 * a0;
        unsigned __int128 pa1 = (unsigned __int128)BK_M1 * a2;
        unsigned __int128 pe0 = (unsigned __int128)BK_M0 * e0;
        unsigned __int128 pe1 = (unsigned __int128)BK_M1 * e2;
        a0 = (uint64_t)(pa1 >> 64) ^ a1 ^ k0; a1 = (uint64_t)pa1;
        a2 = (uint64_t)(pa0 >> 64) ^ a3 ^ k1; a3 = (uint64_t)pa0;
        e0 = (uint64_t)(pe1 >> 64) ^ e1 ^ k0; e1 = (uint64_t)pe1;
        e2 = (uint64_t)(pe0 >> 64) ^ e3 ^ k1; e3 = (uint64_t)pe0;
        k0 += BK_W0;
        k1 += BK_W1;
    }
    o[0] = a0; o[1] = a1; o[2] = a2; o[3] = a3;
    o[4] = e0; o[5] = e1; o[6] = e2; o[7] = e3;
}

#define BK_CHUNK 512  /* words per batch, multiple of 8 */

/* log of x in [2^-53, 1) using +,-,*,/ and exponent bit extraction */
static void bk_log_batch(const double *restrict x, double *restrict out, int n)
{
    for (int i = 0; i < n; ++i) {
        uint64_t bits; memcpy(&bits, &x[i], 8);
        uint64_t eb = (bits >> 52) | 0x4330000000000000ULL;
        double ed; memcpy(&ed, &eb, 8);
        uint64_t mb = (bits & 0x000FFFFFFFFFFFFFULL) | 0x3FE0000000000000ULL;
        double m; memcpy(&m, &mb, 8);
        /* m in [0.5, 1); rescale to [sqrt(1/2), sqrt(2)) */
        m = m * 1.4142135623730951;
        double fe = ((ed - 4503599627370496.0) - 1022.0) - 0.5;
        double s = (m - 1.0) / (m + 1.0);
        double s2 = s * s;
        double pl = 1.0 / 23.0;
        pl = pl * s2 + 1.0 / 21.0; pl = pl * s2 + 1.0 / 19.0; pl = pl * s2 + 1.0 / 17.0;
        pl = pl * s2 + 1.0 / 15.0; pl = pl * s2 + 1.0 / 13.0; pl = pl * s2 + 1.0 / 11.0;
        pl = pl * s2 + 1.0 / 9.0; pl = pl * s2 + 1.0 / 7.0; pl = pl * s2 + 1.0 / 5.0;
        pl = pl * s2 + 1.0 / 3.0;
        double lm = 2.0 * (s + s * (s2 * pl));
        out[i] = fe * 6.93147180369123816490e-01 + (lm + fe * 1.90821492927058770002e-10);
    }
}

static void bk_sincos_batch(const double *restrict a, double *restrict co,
                            double *restrict si, int n)
{
    for (int i = 0; i < n; ++i) {
        double q = (double)(int)(4.0 * a[i] + 0.5);
        double y = a[i] - q * 0.25;
        double t = y * 6.283185307179586;
        double t2 = t * t;
        double ps = -1.0 / 355687428096000.0;
        ps = ps * t2 + 1.0 / 1307674368000.0; ps = ps * t2 - 1.0 / 6227020800.0;
        ps = ps * t2 + 1.0 / 39916800.0; ps = ps * t2 - 1.0 / 362880.0;
        ps = ps * t2 + 1.0 / 5040.0; ps = ps * t2 - 1.0 / 120.0; ps = ps * t2 + 1.0 / 6.0;
        double sv = t - t * (t2 * ps);
        double pc = 1.0 / 6402373705728000.0;
        pc = pc * t2 - 1.0 / 20922789888000.0; pc = pc * t2 + 1.0 / 87178291200.0;
        pc = pc * t2 - 1.0 / 479001600.0; pc = pc * t2 + 1.0 / 3628800.0;
        pc = pc * t2 - 1.0 / 40320.0; pc = pc * t2 + 1.0 / 720.0;
        pc = pc * t2 - 1.0 / 24.0; pc = pc * t2 + 0.5;
        double cv = 1.0 - t2 * pc;
        /* quadrant q mod 4, kept in doubles so the loop vectorizes */
        double qm = q - 4.0 * (double)(int)(q * 0.25);
        double odd = (qm == 1.0 || qm == 3.0) ? 1.0 : 0.0;
        double cc = odd * sv + (1.0 - odd) * cv;
        double ss = odd * cv + (1.0 - odd) * sv;
        co[i] = (qm == 1.0 || qm == 2.0) ? -cc : cc;
        si[i] = (qm >= 2.0) ? -ss : ss;
    }
}

static void bk_boxmuller(const uint64_t *restrict w, double *restrict z, int npairs)
{
    double x[BK_CHUNK / 2], a[BK_CHUNK / 2], lg[BK_CHUNK / 2], c[BK_CHUNK / 2], s[BK_CHUNK / 2];
    for (int p = 0; p < npairs; ++p) {
        x[p] = ((double)(int64_t)(w[2 * p] >> 12) + 0.5) * 2.220446049250313e-16;
        a[p] = ((double)(int64_t)(w[2 * p + 1] >> 12) + 0.5) * 2.220446049250313e-16;
    }
    bk_log_batch(x, lg, npairs);
    bk_sincos_batch(a, c, s, npairs);
    for (int p = 0; p < npairs; ++p) {
        double r = sqrt(-2.0 * lg[p]);
        z[2 * p] = r * c[p];
        z[2 * p + 1] = r * s[p];
    }
}

static void bk_fill(uint64_t seed, uint64_t domain, uint64_t stream,
                    uint64_t start, double *out, ptrdiff_t count, int gaussian)
{
    uint64_t w[BK_CHUNK];
    double z[BK_CHUNK];
    uint64_t b = start >> 2;
    ptrdiff_t skip = (ptrdiff_t)(start & 3), i = 0;
    while (i < count) {
        ptrdiff_t need = count - i + skip;
        int nw = need >= BK_CHUNK ? BK_CHUNK : (int)((need + 7) & ~(ptrdiff_t)7);
        for (int k = 0; k < nw; k += 8, b += 2) bk_philox2(seed, 0, b, domain, stream, w + k);
        if (gaussian) bk_boxmuller(w, z, nw / 2);
        else for (int k = 0; k < nw; ++k) z[k] = ((double)(int64_t)(w[k] >> 12) + 0.5) * 2.220446049250313e-16;
        ptrdiff_t take = nw - skip;
        if (take > count - i) take = count - i;
        memcpy(out + i, z + skip, (size_t)take * sizeof(double));
        i += take;
        skip = 0;
    }
}

#endif
