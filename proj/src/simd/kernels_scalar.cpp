#include <cmath>

#include "cmalab/simd/kernels.hpp"
#include "kernels_impl.hpp"

namespace cmalab::simd::scalar {

void stencil_interior(const double* f, std::size_t count, double* d1, double* d2) {
    for (std::size_t k = 2; k + 2 < count; ++k) {
        d1[k] = (f[k - 2] - f[k + 2]) + 8.0 * (f[k + 1] - f[k - 1]);
        d2[k] = -(f[k - 2] + f[k + 2]) + 16.0 * (f[k - 1] + f[k + 1]) - 30.0 * f[k];
    }
}

void ma_reduced(const double* b1, const double* b2, const double* p1, const double* p2,
                std::size_t count, int n, double* u1, double* u2, double* dens) {
    for (std::size_t i = 0; i < count; ++i) {
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
    for (std::size_t i = 0; i < count; ++i) out[i] = dens[i] - factor[i] * rhs[i];
}

void linearization(const double* u1, const double* u2, const double* factor, const double* rhs,
                   std::size_t count, int n, double scale, double* a, double* b, double* c) {
    for (std::size_t i = 0; i < count; ++i) {
        double pw2 = 1.0;  // u1^(n-2)
        for (int j = 2; j < n; ++j) pw2 *= u1[i];
        const double pw1 = n >= 2 ? pw2 * u1[i] : 1.0;
        a[i] = n >= 2 ? static_cast<double>(n - 1) * pw2 * u2[i] : 0.0;
        b[i] = pw1;
        c[i] = scale * factor[i] * rhs[i];
    }
}

double weighted_dot(const double* w, const double* f, const double* g, std::size_t count) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += w[i] * f[i] * g[i];
    return acc;
}

double max_abs(const double* x, std::size_t count) {
    double m = 0.0;
    for (std::size_t i = 0; i < count; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

}  // namespace cmalab::simd::scalar
