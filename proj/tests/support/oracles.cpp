#include "oracles.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace cmalab::oracle {

namespace {

double lse(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double complex_hessian_det(const std::function<double(double)>& f, std::span<const double> z, double step) {
    const std::size_t dim = z.size();
    const std::size_t n = dim / 2;
    if (n < 1 || n > 2 || dim != 2 * n) throw std::invalid_argument("complex_hessian_det: n must be 1 or 2");
    const auto g = [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        return f(std::log(r2));
    };
    std::array<std::array<double, 4>, 4> hess{};
    std::array<double, 4> x{};
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a; b < dim; ++b) {
            double acc = 0.0;
            for (int sa : {-1, 1}) {
                for (int sb : {-1, 1}) {
                    std::copy(z.begin(), z.end(), x.begin());
                    x[a] += sa * step;
                    x[b] += sb * step;
                    acc += sa * sb * g(std::span<const double>(x.data(), dim));
                }
            }
            hess[a][b] = hess[b][a] = acc / (4.0 * step * step);
        }
    }
    // d_i d_jbar = (1/4)(d_xi d_xj + d_yi d_yj + i (d_xi d_yj - d_yi d_xj))
    std::array<std::array<std::complex<double>, 2>, 2> c{};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
            c[i][j] = 0.25 * std::complex<double>(hess[xi][xj] + hess[yi][yj], hess[xi][yj] - hess[yi][xj]);
        }
    }
    if (n == 1) return c[0][0].real();
    return (c[0][0] * c[1][1] - c[0][1] * c[1][0]).real();
}

double fs(double d, double s) { return d * (s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s))); }
double fs_d1(double d, double s) { return d / (1.0 + std::exp(-s)); }
double fs_d2(double d, double s) {
    const double e = std::exp(-std::abs(s));
    return d * e / ((1.0 + e) * (1.0 + e));
}

double xi(double s, double eps) { return lse(s, 2.0 * std::log(eps)); }
double xi_d1(double s, double eps) { return 1.0 / (1.0 + eps * eps * std::exp(-s)); }
double xi_d2(double s, double eps) {
    const double a = s - 2.0 * std::log(eps);
    const double e = std::exp(-std::abs(a));
    return e / ((1.0 + e) * (1.0 + e));
}

NeutralDirac neutral_dirac(int n, double d, double gamma, double eps, const SGrid& grid) {
    const double lo = grid.s_min(), hi = grid.s_max();
    const double gn = std::pow(gamma, n);
    const double p0 = std::pow(fs_d1(d, lo), n), p1 = std::pow(fs_d1(d, hi), n);
    const double x0 = std::pow(xi_d1(lo, eps), n), x1 = std::pow(xi_d1(hi, eps), n);
    const double mass = p1 - p0;
    const double top = std::max(0.0, (mass - gn * (x1 - x0)) / mass);
    // u'^n = psi'(lo)^n + gamma^n (xi'^n - xi'(lo)^n) + top (psi'^n - psi'(lo)^n)
    const auto slope = [&](double s) {
        const double v = p0 + gn * (std::pow(xi_d1(s, eps), n) - x0) + top * (std::pow(fs_d1(d, s), n) - p0);
        return std::pow(std::max(v, 0.0), 1.0 / n);
    };
    NeutralDirac out;
    const std::size_t m = grid.size();
    out.u.resize(m);
    out.u1.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.u1[i] = slope(grid.node(i));
    if (n == 1) {
        // u = gamma xi + top psi + b s + K
        const double b = fs_d1(d, lo) - gamma * xi_d1(lo, eps) - top * fs_d1(d, lo);
        const auto raw = [&](double s) { return gamma * xi(s, eps) + top * fs(d, s) + b * s; };
        const double k = fs(d, hi) - raw(hi);
        for (std::size_t i = 0; i < m; ++i) out.u[i] = raw(grid.node(i)) + k;
        return out;
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    out.u[m - 1] = fs(d, hi);
    for (std::size_t i = m - 1; i-- > 0;) {
        const double piece = ts.integrate(slope, grid.node(i), grid.node(i + 1));
        out.u[i] = out.u[i + 1] - piece;
    }
    return out;
}

double disk_mass(const std::function<double(double)>& radial_density, double radius) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const auto integrand = [&](double r) { return 2.0 * M_PI * r * radial_density(r); };
    return ts.integrate(integrand, 0.0, radius);
}

double richardson(double coarse, double fine, double order) {
    const double f = std::pow(2.0, order);
    return (f * fine - coarse) / (f - 1.0);
}

std::vector<double> random_direction(const SGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(-15.0, 15.0), width(0.7, 4.0);
    std::vector<double> v(grid.size(), 0.0);
    for (int b = 0; b < 4; ++b) {
        const double a = amp(rng), c = centre(rng), w = width(rng);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += a / std::cosh((grid.node(i) - c) / w);
    }
    return v;
}

std::vector<double> sech_perturbation(const SGrid& grid, double amplitude) {
    std::vector<double> p(grid.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = grid.node(i);
        p[i] = amplitude * std::sin(s) / std::cosh(s);
    }
    return p;
}

double sup_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double sup_diff(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("sup_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

}  // namespace cmalab::oracle
