#pragma once

#include <cstddef>
#include <string_view>

namespace cmalab::simd {

enum class Isa { scalar, avx2 };

// Flat kernels shared by the stencil, residual, Jacobian and quadrature code.
// Every entry has a scalar reference; vector variants must agree with it up to
// rounding (FMA contraction is allowed).
struct KernelTable {
    Isa isa;

    // Interior fourth-order first and second differences for k in [2, count-3].
    // d1 receives 12h*f', d2 receives 12h^2*f''.
    void (*stencil_interior)(const double* f, std::size_t count, double* d1, double* d2);

    // u1 = b1 + p1, u2 = b2 + p2, dens = u1^(n-1) * u2.
    void (*ma_reduced)(const double* b1, const double* b2, const double* p1, const double* p2,
                       std::size_t count, int n, double* u1, double* u2, double* dens);

    // out = dens - factor * rhs.
    void (*residual_combine)(const double* dens, const double* factor, const double* rhs,
                             std::size_t count, double* out);

    // a = (n-1) u1^(n-2) u2, b = u1^(n-1), c = scale * factor * rhs.
    void (*linearization)(const double* u1, const double* u2, const double* factor,
                          const double* rhs, std::size_t count, int n, double scale,
                          double* a, double* b, double* c);

    // sum_i w_i f_i g_i
    double (*weighted_dot)(const double* w, const double* f, const double* g, std::size_t count);

    // max_i |x_i|
    double (*max_abs)(const double* x, std::size_t count);
};

const KernelTable& scalar_kernels() noexcept;
// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

bool isa_available(Isa isa) noexcept;

// Active table. Chosen on first use: AVX2 when available unless CMALAB_SIMD=scalar.
const KernelTable& active() noexcept;

// Force a table (tests, benchmarks). Throws ConfigurationError if unavailable.
void select(Isa isa);

std::string_view isa_name(Isa isa) noexcept;

}  // namespace cmalab::simd
