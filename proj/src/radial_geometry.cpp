#include "cmalab/radial_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmalab/errors.hpp"
#include "cmalab/simd/kernels.hpp"
#include "cmalab/stencil.hpp"

namespace cmalab {
namespace {

void require_size(const SGrid& g, std::size_t size, const char* what) {
    if (size != g.size()) {
        throw ConfigurationError(std::string(what) + ": expected " + std::to_string(g.size()) +
                                 " values, got " + std::to_string(size));
    }
}

double int_pow(double x, int k) noexcept {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

std::vector<double> trapezoid_weights(const SGrid& g) {
    std::vector<double> w(g.size(), g.h());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

}  // namespace

RadialPotential::RadialPotential(SGrid g, int dim, std::vector<double> v)
    : grid(g), n(dim), values(std::move(v)) {
    if (dim < 1) throw ConfigurationError("potential: dimension must be at least 1");
    require_size(grid, values.size(), "potential");
}

RadialPotential::RadialPotential(SGrid g, int dim, std::vector<double> v, std::vector<double> first,
                                 std::vector<double> second)
    : RadialPotential(g, dim, std::move(v)) {
    require_size(grid, first.size(), "potential first derivative");
    require_size(grid, second.size(), "potential second derivative");
    d1 = std::move(first);
    d2 = std::move(second);
}

Derivatives derivatives(const RadialPotential& u) {
    if (u.has_exact_derivatives()) return {u.d1, u.d2};
    Derivatives d{std::vector<double>(u.values.size()), std::vector<double>(u.values.size())};
    stencil::differentiate(u.values, u.grid.h(), d.d1, d.d2);
    return d;
}

double logistic(double s) noexcept {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double softplus(double s) noexcept {
    if (s > 0.0) return s + std::log1p(std::exp(-s));
    return std::log1p(std::exp(s));
}

RadialPotential fubini_study_potential(int n, double degree, const SGrid& grid) {
    if (n < 1) throw ConfigurationError("model: n must be at least 1, got " + std::to_string(n));
    if (!(degree > 0.0) || !std::isfinite(degree)) {
        throw ConfigurationError("model: degree must be positive, got " + std::to_string(degree));
    }
    const std::size_t m = grid.size();
    std::vector<double> v(m), a(m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = grid.node(i);
        v[i] = degree * softplus(s);
        a[i] = degree * logistic(s);
        b[i] = degree * logistic(s) * logistic(-s);
    }
    return RadialPotential(grid, n, std::move(v), std::move(a), std::move(b));
}

KahlerModel::KahlerModel(int n, double degree, const SGrid& grid)
    : n_(n), degree_(degree), psi_(fubini_study_potential(n, degree, grid)), vol_(reduced_density(psi_)),
      mass_(mass(psi_)) {}

std::vector<double> reduced_density(const RadialPotential& u) {
    const Derivatives d = derivatives(u);
    std::vector<double> out(d.d1.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = int_pow(d.d1[i], u.n - 1) * d.d2[i];
    return out;
}

std::vector<double> ma_density(const RadialPotential& u) {
    std::vector<double> out = reduced_density(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::exp(-u.n * u.grid.node(i));
    return out;
}

double mass(const RadialPotential& u) {
    const Derivatives d = derivatives(u);
    return int_pow(d.d1.back(), u.n) - int_pow(d.d1.front(), u.n);
}

std::vector<double> ricci_potential(const RadialPotential& u) {
    const Derivatives d = derivatives(u);
    std::vector<double> rho(d.d1.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(d.d1[i] > 0.0) || !(d.d2[i] > 0.0)) {
            throw DegeneracyError("ricci potential: u' or u'' not positive at node " + std::to_string(i) +
                                      " (s = " + std::to_string(u.grid.node(i)) + ")",
                                  i);
        }
        rho[i] = u.n * u.grid.node(i) - (u.n - 1) * std::log(d.d1[i]) - std::log(d.d2[i]);
    }
    return rho;
}

namespace {

struct Difference {
    std::vector<double> d1, d2, floor1, floor2;
};

// Derivatives of q - p together with the rounding floor of each entry.
Difference difference(const RadialPotential& q, const RadialPotential& p, double p_scale) {
    if (!(q.grid == p.grid)) throw ConfigurationError("dominates: potentials live on different grids");
    const std::size_t m = q.values.size();
    const double h = q.grid.h();
    Difference r{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m),
                 std::vector<double>(m)};
    std::vector<double> mag(m);
    for (std::size_t i = 0; i < m; ++i) mag[i] = std::abs(q.values[i]) + std::abs(p_scale * p.values[i]);
    const Derivatives dq = derivatives(q);
    const Derivatives dp = derivatives(p);
    for (std::size_t i = 0; i < m; ++i) {
        r.d1[i] = dq.d1[i] - p_scale * dp.d1[i];
        r.d2[i] = dq.d2[i] - p_scale * dp.d2[i];
        r.floor1[i] = stencil::d1_noise(mag, h, i);
        r.floor2[i] = stencil::d2_noise(mag, h, i);
    }
    return r;
}

}  // namespace

DominanceReport dominates(const RadialPotential& q, const RadialPotential& p, double tol) {
    const Difference d = difference(q, p, 1.0);
    DominanceReport rep;
    rep.min_first = std::numeric_limits<double>::infinity();
    rep.min_second = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < d.d1.size(); ++i) {
        rep.min_first = std::min(rep.min_first, d.d1[i]);
        rep.min_second = std::min(rep.min_second, d.d2[i]);
        if (!rep.holds) continue;
        if (d.d1[i] < -(tol + d.floor1[i])) {
            rep.holds = false;
            rep.first_violation = i;
            rep.violated_order = 1;
        } else if (d.d2[i] < -(tol + d.floor2[i])) {
            rep.holds = false;
            rep.first_violation = i;
            rep.violated_order = 2;
        }
    }
    return rep;
}

double dominance_margin(const RadialPotential& q, const RadialPotential& p, double tol) {
    // Two passes so that the rounding floor reflects the magnitude of q - eta p.
    double eta = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const Difference dq = difference(q, p, 0.0);
        const Derivatives dp = derivatives(p);
        std::vector<double> mag(q.values.size());
        for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(q.values[i]) + eta * std::abs(p.values[i]);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
            const double s1 = tol + stencil::d1_noise(mag, q.grid.h(), i);
            const double s2 = tol + stencil::d2_noise(mag, q.grid.h(), i);
            if (dp.d1[i] > 0.0) {
                best = std::min(best, (dq.d1[i] + s1) / dp.d1[i]);
            } else if (dq.d1[i] < -s1) {
                return 0.0;
            }
            if (dp.d2[i] > 0.0) {
                best = std::min(best, (dq.d2[i] + s2) / dp.d2[i]);
            } else if (dq.d2[i] < -s2) {
                return 0.0;
            }
        }
        eta = std::max(0.0, best);
        if (!std::isfinite(eta)) return eta;
    }
    return eta;
}

double average(std::span<const double> phi, const KahlerModel& model) {
    require_size(model.grid(), phi.size(), "average");
    const std::vector<double> w = trapezoid_weights(model.grid());
    const auto vol = model.volume_density();
    const auto& k = simd::active();
    const std::vector<double> ones(phi.size(), 1.0);
    const double total = k.weighted_dot(w.data(), vol.data(), ones.data(), phi.size());
    return k.weighted_dot(w.data(), vol.data(), phi.data(), phi.size()) / total;
}

LelongEstimate lelong_estimate(const RadialPotential& u, double window, std::optional<double> anchor) {
    const SGrid& g = u.grid;
    const double a = anchor.value_or(g.s_min());
    if (!(window >= 4.0 * g.h() * (1.0 - 1e-12))) {
        throw ConfigurationError("lelong window " + std::to_string(window) + " is below 4h = " +
                                 std::to_string(4.0 * g.h()));
    }
    if (a < g.s_min() - 0.5 * g.h() || a + window > g.s_max() + 0.5 * g.h()) {
        throw ConfigurationError("lelong window [" + std::to_string(a) + ", " + std::to_string(a + window) +
                                 "] leaves the grid");
    }
    const std::size_t i0 = g.nearest(a);
    const auto steps = static_cast<std::size_t>(std::llround(window / g.h()));
    const std::size_t i1 = std::min(g.size() - 1, i0 + steps);
    const std::size_t ih = i0 + std::max<std::size_t>(1, (i1 - i0) / 2);
    const double w = g.node(i1) - g.node(i0);
    const double wh = g.node(ih) - g.node(i0);
    const double full = (u.values[i1] - u.values[i0]) / w;
    const double half = (u.values[ih] - u.values[i0]) / wh;
    LelongEstimate e;
    e.value = std::max(0.0, full);
    e.window_width = w;
    e.sensitivity = std::abs(std::max(0.0, half) - e.value);
    e.anchor = g.node(i0);
    return e;
}

std::optional<std::size_t> first_nonconvex_node(const RadialPotential& u, double tol) {
    const Derivatives d = derivatives(u);
    std::vector<double> mag(u.values.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(u.values[i]);
    const double slack = tol + stencil::solve_noise(mag);
    const double delta = stencil::value_noise(mag);
    const double h = u.grid.h();
    for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
        const double f1 = slack + stencil::d1_noise(mag, h, i) + stencil::d1_spread(delta, h, i, mag.size());
        const double f2 = slack + stencil::d2_noise(mag, h, i) + stencil::d2_spread(delta, h, i, mag.size());
        if (!(d.d1[i] > -f1) || !(d.d2[i] > -f2)) return i;
    }
    return std::nullopt;
}

Diagnostics diagnose(std::span<const double> phi, const RadialPotential& u, const KahlerModel& model,
                     const LelongWindow& window) {
    Diagnostics d;
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    d.inf_phi = *lo;
    d.sup_phi = *hi;
    d.avg_phi = std::clamp(average(phi, model), d.inf_phi, d.sup_phi);
    const SGrid& g = model.grid();
    const double width = std::min(window.width, g.s_max() - g.s_min());
    const double anchor = std::clamp(window.anchor, g.s_min(), g.s_max() - width);
    d.lelong = lelong_estimate(u, width, anchor);
    d.mass = mass(u);
    return d;
}

}  // namespace cmalab
