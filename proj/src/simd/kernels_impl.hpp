#pragma once

#include <cstddef>

namespace cmalab::simd {

namespace scalar {
void stencil_interior(const double* f, std::size_t count, double* d1, double* d2);
void ma_reduced(const double* b1, const double* b2, const double* p1, const double* p2,
                std::size_t count, int n, double* u1, double* u2, double* dens);
void residual_combine(const double* dens, const double* factor, const double* rhs, std::size_t count,
                      double* out);
void linearization(const double* u1, const double* u2, const double* factor, const double* rhs,
                   std::size_t count, int n, double scale, double* a, double* b, double* c);
double weighted_dot(const double* w, const double* f, const double* g, std::size_t count);
double max_abs(const double* x, std::size_t count);
}  // namespace scalar

namespace avx2 {
void stencil_interior(const double* f, std::size_t count, double* d1, double* d2);
void ma_reduced(const double* b1, const double* b2, const double* p1, const double* p2,
                std::size_t count, int n, double* u1, double* u2, double* dens);
void residual_combine(const double* dens, const double* factor, const double* rhs, std::size_t count,
                      double* out);
void linearization(const double* u1, const double* u2, const double* factor, const double* rhs,
                   std::size_t count, int n, double scale, double* a, double* b, double* c);
double weighted_dot(const double* w, const double* f, const double* g, std::size_t count);
double max_abs(const double* x, std::size_t count);
}  // namespace avx2

}  // namespace cmalab::simd
