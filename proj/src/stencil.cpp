#include "cmalab/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmalab/errors.hpp"
#include "cmalab/simd/kernels.hpp"

namespace cmalab::stencil {
namespace {

constexpr double kNoiseFactor = 8.0;
constexpr double kSolveNoise = 1e-11;
constexpr double kValueNoise = 256.0;

Row make(std::size_t first, std::initializer_list<double> c) {
    Row r{first, c.size(), {}};
    std::size_t i = 0;
    for (double v : c) r.coeff[i++] = v;
    return r;
}

}  // namespace

Row d1_row(std::size_t k, std::size_t points) {
    const std::size_t last = points - 1;
    if (k == 0) return make(0, {-25, 48, -36, 16, -3});
    if (k == 1) return make(0, {-3, -10, 18, -6, 1});
    if (k == last) return make(last - 4, {3, -16, 36, -48, 25});
    if (k == last - 1) return make(last - 4, {-1, 6, -18, 10, 3});
    return make(k - 2, {1, -8, 0, 8, -1});
}

Row d2_row(std::size_t k, std::size_t points) {
    const std::size_t last = points - 1;
    if (k == 0) return make(0, {45, -154, 214, -156, 61, -10});
    if (k == 1) return make(0, {10, -15, -4, 14, -6, 1});
    if (k == last) return make(last - 5, {-10, 61, -156, 214, -154, 45});
    if (k == last - 1) return make(last - 5, {1, -6, 14, -4, -15, 10});
    return make(k - 2, {-1, 16, -30, 16, -1});
}

void differentiate(std::span<const double> f, double h, std::span<double> d1, std::span<double> d2) {
    const std::size_t n = f.size();
    if (n < min_points) {
        throw ConfigurationError("finite differences need at least " + std::to_string(min_points) +
                                 " grid points, got " + std::to_string(n));
    }
    if (d1.size() != n || d2.size() != n) throw ConfigurationError("finite differences: size mismatch");
    simd::active().stencil_interior(f.data(), n, d1.data(), d2.data());
    const double s1 = 1.0 / (12.0 * h);
    const double s2 = 1.0 / (12.0 * h * h);
    for (std::size_t k = 2; k + 2 < n; ++k) {
        d1[k] *= s1;
        d2[k] *= s2;
    }
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
        const Row r1 = d1_row(k, n);
        const Row r2 = d2_row(k, n);
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < r1.count; ++j) a += r1.coeff[j] * f[r1.first + j];
        for (std::size_t j = 0; j < r2.count; ++j) b += r2.coeff[j] * f[r2.first + j];
        d1[k] = a * s1;
        d2[k] = b * s2;
    }
}

double d1_noise(std::span<const double> f, double h, std::size_t k) {
    const Row r = d1_row(k, f.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < r.count; ++j) acc += std::abs(r.coeff[j] * f[r.first + j]);
    return kNoiseFactor * std::numeric_limits<double>::epsilon() * acc / (12.0 * h);
}

double d2_noise(std::span<const double> f, double h, std::size_t k) {
    const Row r = d2_row(k, f.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < r.count; ++j) acc += std::abs(r.coeff[j] * f[r.first + j]);
    return kNoiseFactor * std::numeric_limits<double>::epsilon() * acc / (12.0 * h * h);
}

double solve_noise(std::span<const double> f) {
    double m = 1.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return kSolveNoise * m;
}

double d1_spread(double delta, double h, std::size_t k, std::size_t points) {
    const Row r = d1_row(k, points);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.count; ++j) acc += std::abs(r.coeff[j]);
    return delta * acc / (12.0 * h);
}

double d2_spread(double delta, double h, std::size_t k, std::size_t points) {
    const Row r = d2_row(k, points);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.count; ++j) acc += std::abs(r.coeff[j]);
    return delta * acc / (12.0 * h * h);
}

double value_noise(std::span<const double> u) {
    double m = 1.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return kValueNoise * std::numeric_limits<double>::epsilon() * m;
}

}  // namespace cmalab::stencil
