#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace cmalab::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

void stencil_interior(const double* f, std::size_t count, double* d1, double* d2) {
    if (count < 5) return;
    const __m256d eight = _mm256_set1_pd(8.0);
    const __m256d sixteen = _mm256_set1_pd(16.0);
    const __m256d thirty = _mm256_set1_pd(30.0);
    std::size_t k = 2;
    for (; k + 2 + 3 < count; k += 4) {
        const __m256d fm2 = _mm256_loadu_pd(f + k - 2);
        const __m256d fm1 = _mm256_loadu_pd(f + k - 1);
        const __m256d f0 = _mm256_loadu_pd(f + k);
        const __m256d fp1 = _mm256_loadu_pd(f + k + 1);
        const __m256d fp2 = _mm256_loadu_pd(f + k + 2);
        const __m256d a = _mm256_fmadd_pd(eight, _mm256_sub_pd(fp1, fm1), _mm256_sub_pd(fm2, fp2));
        const __m256d outer = _mm256_add_pd(fm2, fp2);
        const __m256d inner = _mm256_add_pd(fm1, fp1);
        const __m256d b = _mm256_fnmadd_pd(thirty, f0, _mm256_fmsub_pd(sixteen, inner, outer));
        _mm256_storeu_pd(d1 + k, a);
        _mm256_storeu_pd(d2 + k, b);
    }
    for (; k + 2 < count; ++k) {
        d1[k] = (f[k - 2] - f[k + 2]) + 8.0 * (f[k + 1] - f[k - 1]);
        d2[k] = -(f[k - 2] + f[k + 2]) + 16.0 * (f[k - 1] + f[k + 1]) - 30.0 * f[k];
    }
}

void ma_reduced(const double* b1, const double* b2, const double* p1, const double* p2,
                std::size_t count, int n, double* u1, double* u2, double* dens) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d a = _mm256_add_pd(_mm256_loadu_pd(b1 + i), _mm256_loadu_pd(p1 + i));
        const __m256d b = _mm256_add_pd(_mm256_loadu_pd(b2 + i), _mm256_loadu_pd(p2 + i));
        __m256d pw = _mm256_set1_pd(1.0);
        for (int j = 1; j < n; ++j) pw = _mm256_mul_pd(pw, a);
        _mm256_storeu_pd(u1 + i, a);
        _mm256_storeu_pd(u2 + i, b);
        _mm256_storeu_pd(dens + i, _mm256_mul_pd(pw, b));
    }
    for (; i < count; ++i) {
        const double a = b1[i] + p1[i];
        const double b = b2[i] + p2[i];
        double pw = 1.0;
        for (int j = 1; j < n; ++j) pw *= a;
        u1[i] = a;
        u2[i] = b;
        dens[i] = pw * b;
    }
}

void residual_combine(const double* dens, const double* factor, const double* rhs, std::size_t count,
                      double* out) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d r = _mm256_fnmadd_pd(_mm256_loadu_pd(factor + i), _mm256_loadu_pd(rhs + i),
                                           _mm256_loadu_pd(dens + i));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < count; ++i) out[i] = dens[i] - factor[i] * rhs[i];
}

void linearization(const double* u1, const double* u2, const double* factor, const double* rhs,
                   std::size_t count, int n, double scale, double* a, double* b, double* c) {
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d vnm1 = _mm256_set1_pd(static_cast<double>(n - 1));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d x = _mm256_loadu_pd(u1 + i);
        __m256d pw2 = one;
        for (int j = 2; j < n; ++j) pw2 = _mm256_mul_pd(pw2, x);
        const __m256d pw1 = n >= 2 ? _mm256_mul_pd(pw2, x) : one;
        const __m256d va = n >= 2 ? _mm256_mul_pd(_mm256_mul_pd(vnm1, pw2), _mm256_loadu_pd(u2 + i)) : zero;
        _mm256_storeu_pd(a + i, va);
        _mm256_storeu_pd(b + i, pw1);
        _mm256_storeu_pd(c + i, _mm256_mul_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(factor + i)),
                                              _mm256_loadu_pd(rhs + i)));
    }
    for (; i < count; ++i) {
        double pw2 = 1.0;
        for (int j = 2; j < n; ++j) pw2 *= u1[i];
        const double pw1 = n >= 2 ? pw2 * u1[i] : 1.0;
        a[i] = n >= 2 ? static_cast<double>(n - 1) * pw2 * u2[i] : 0.0;
        b[i] = pw1;
        c[i] = scale * factor[i] * rhs[i];
    }
}

double weighted_dot(const double* w, const double* f, const double* g, std::size_t count) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= count; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(f + i)),
                               _mm256_loadu_pd(g + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(f + i + 4)),
                               _mm256_loadu_pd(g + i + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < count; ++i) acc += w[i] * f[i] * g[i];
    return acc;
}

double max_abs(const double* x, std::size_t count) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) m = _mm256_max_pd(m, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    double r = hmax(m);
    for (; i < count; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

}  // namespace cmalab::simd::avx2
