#include "cmalab/singular_rhs.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cmalab/errors.hpp"

namespace cmalab {
namespace {

constexpr double kPi = boost::math::constants::pi<double>();

double int_pow(double x, int k) noexcept {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// log psi', log psi'' for psi = d log(1 + e^s)
double log_psi_d1(double d, double s) noexcept { return std::log(d) - softplus(-s); }
double log_psi_d2(double d, double s) noexcept { return std::log(d) - softplus(-s) - softplus(s); }

// log xi', log xi'' with the convention xi_0(s) = s
double log_xi_d1(double s, double eps) noexcept {
    if (eps == 0.0) return 0.0;
    return -softplus(2.0 * std::log(eps) - s);
}
double log_xi_d2(double s, double eps) noexcept {
    if (eps == 0.0) return -std::numeric_limits<double>::infinity();
    const double x = s - 2.0 * std::log(eps);
    return -softplus(-x) - softplus(x);
}

double xi_value(double s, double eps) noexcept {
    if (eps == 0.0) return s;
    // Add the correction to the larger of s and 2 log eps so xi_eps >= s survives rounding.
    const double l = 2.0 * std::log(eps);
    return std::max(s, l) + softplus(-std::abs(s - l));
}

// Reference measure (psi')^(n-1) psi'' at s.
double reference_measure(int n, double d, double s) noexcept {
    return std::exp((n - 1) * log_psi_d1(d, s) + log_psi_d2(d, s));
}

// Unnormalized log of the divisor profile relative to the reference volume.
double divisor_log_profile(double delta, double eps, double s) noexcept {
    return -delta * (xi_value(s, eps) - softplus(s));
}

std::string format(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

RhsFamily::RhsFamily(RhsKind kind, const KahlerModel& model)
    : kind_(kind), n_(model.n()), degree_(model.degree()), grid_(model.grid()) {}

std::optional<double> RhsFamily::pole_scale() const noexcept {
    if (kind_ == RhsKind::dirac_approx && gamma_ > 0.0) return 2.0 * std::log(epsilon_);
    if (kind_ == RhsKind::divisor && delta_prime_ > 0.0 && epsilon_ > 0.0) return 2.0 * std::log(epsilon_);
    return std::nullopt;
}

double RhsFamily::measure_at(double s) const {
    switch (kind_) {
        case RhsKind::constant:
            return reference_measure(n_, degree_, s);
        case RhsKind::dirac_approx: {
            double sing = 0.0;
            if (gamma_ > 0.0) {
                sing = std::exp(n_ * std::log(gamma_) + (n_ - 1) * log_xi_d1(s, epsilon_) + log_xi_d2(s, epsilon_));
            }
            return sing + top_up_ * reference_measure(n_, degree_, s);
        }
        case RhsKind::divisor:
            return top_up_ * std::exp(divisor_log_profile(delta_prime_, epsilon_, s) + (n_ - 1) * log_psi_d1(degree_, s) +
                                      log_psi_d2(degree_, s));
    }
    return 0.0;
}

std::optional<double> RhsFamily::cumulative_mass(double s) const {
    const double s0 = grid_.s_min();
    const double p0 = int_pow(degree_ * logistic(s0), n_);
    const double p = int_pow(degree_ * logistic(s), n_);
    switch (kind_) {
        case RhsKind::constant:
            return p - p0;
        case RhsKind::dirac_approx: {
            const double g = int_pow(gamma_, n_);
            const double x0 = int_pow(std::exp(log_xi_d1(s0, epsilon_)), n_);
            const double x = int_pow(std::exp(log_xi_d1(s, epsilon_)), n_);
            return g * (x - x0) + top_up_ * (p - p0);
        }
        case RhsKind::divisor:
            if (delta_prime_ == 0.0) return top_up_ * (p - p0);
            return std::nullopt;
    }
    return std::nullopt;
}

double dirac_density(double a, double r2) {
    if (!(a > 0.0)) throw ConfigurationError("dirac_density: a must be positive, got " + format(a));
    if (!(r2 >= 0.0)) throw ConfigurationError("dirac_density: r2 must be nonnegative, got " + format(r2));
    const double q = r2 + a * a;
    return a * a / (kPi * q * q);
}

double xi_eps(double s, double eps) {
    if (!(eps > 0.0)) throw ConfigurationError("xi_eps: eps must be positive, got " + format(eps));
    return xi_value(s, eps);
}

double xi_eps_d1(double s, double eps) noexcept { return std::exp(log_xi_d1(s, eps)); }

double xi_eps_d2(double s, double eps) noexcept { return std::exp(log_xi_d2(s, eps)); }

RhsFamily build_constant_rhs(const KahlerModel& model) {
    RhsFamily f(RhsKind::constant, model);
    f.normalized_ = true;
    f.values_.assign(model.grid().size(), 1.0);
    const auto vol = model.volume_density();
    f.measure_.assign(vol.begin(), vol.end());
    return f;
}

RhsFamily build_dirac_rhs(double gamma, double eps, const KahlerModel& model) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigurationError("dirac rhs: gamma must be nonnegative, got " + format(gamma));
    }
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw ConfigurationError("dirac rhs: epsilon must be positive, got " + format(eps));
    }
    if (gamma > model.degree()) {
        throw ConstraintViolation("dirac rhs: gamma = " + format(gamma) + " exceeds the degree d = " +
                                  format(model.degree()) + "; the pole mass gamma^n would exceed d^n");
    }
    RhsFamily f(RhsKind::dirac_approx, model);
    f.gamma_ = gamma;
    f.epsilon_ = eps;
    const int n = model.n();
    const SGrid& g = model.grid();
    const double target = model.reference_mass();
    const double pole = int_pow(gamma, n) * (int_pow(xi_eps_d1(g.s_max(), eps), n) - int_pow(xi_eps_d1(g.s_min(), eps), n));
    f.top_up_ = std::max(0.0, (target - pole) / target);
    if (gamma == model.degree()) {
        f.warnings_.push_back("dirac rhs: gamma equals the degree; the smooth top-up is " + format(f.top_up_));
    }
    f.normalized_ = true;
    const double d = model.degree();
    const auto vol = model.volume_density();
    f.values_.resize(g.size());
    f.measure_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = g.node(i);
        double sing = 0.0;
        if (gamma > 0.0) {
            const double lr = (n - 1) * (log_xi_d1(s, eps) - log_psi_d1(d, s)) + log_xi_d2(s, eps) - log_psi_d2(d, s);
            sing = int_pow(gamma, n) * std::exp(lr);
        }
        f.values_[i] = sing + f.top_up_;
        f.measure_[i] = f.values_[i] * vol[i];
    }
    return f;
}

RhsFamily build_divisor_rhs(double delta_prime, double eps, const KahlerModel& model) {
    if (!(delta_prime >= 0.0) || !std::isfinite(delta_prime)) {
        throw ConfigurationError("divisor rhs: delta_prime must be nonnegative, got " + format(delta_prime));
    }
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw ConfigurationError("divisor rhs: epsilon must be nonnegative, got " + format(eps));
    }
    const int n = model.n();
    if (delta_prime >= n) {
        throw ConstraintViolation("divisor rhs: delta_prime = " + format(delta_prime) +
                                  " >= n; the limiting mass near the pole diverges");
    }
    RhsFamily f(RhsKind::divisor, model);
    f.delta_prime_ = delta_prime;
    f.epsilon_ = eps;
    const SGrid& g = model.grid();
    const double d = model.degree();
    double integral = 0.0;
    if (delta_prime == 0.0) {
        f.top_up_ = 1.0;
    } else {
        auto integrand = [&](double s) {
            return std::exp(divisor_log_profile(delta_prime, eps, s) + (n - 1) * log_psi_d1(d, s) + log_psi_d2(d, s));
        };
        using boost::math::quadrature::gauss_kronrod;
        const double len = g.s_max() - g.s_min();
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / 2.0)));
        for (int j = 0; j < pieces; ++j) {
            const double a = g.s_min() + len * j / pieces;
            const double b = j + 1 == pieces ? g.s_max() : g.s_min() + len * (j + 1) / pieces;
            integral += gauss_kronrod<double, 31>::integrate(integrand, a, b, 12, 1e-14);
        }
        f.top_up_ = model.reference_mass() / (n * integral);
    }
    f.normalized_ = true;
    const auto vol = model.volume_density();
    f.values_.resize(g.size());
    f.measure_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        f.values_[i] = f.top_up_ * std::exp(divisor_log_profile(delta_prime, eps, g.node(i)));
        f.measure_[i] = f.values_[i] * vol[i];
    }
    return f;
}

double reduced_mass(const RhsFamily& family) {
    const auto m = family.measure();
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += (i == 0 || i + 1 == m.size() ? 0.5 : 1.0) * m[i];
    return family.n() * acc * family.grid().h();
}

LowerBoundReport check_lower_bound(const RhsFamily& family, const KahlerModel& model, double t,
                                   std::optional<std::span<const double>> phi) {
    const SGrid& g = model.grid();
    if (!(family.grid() == g)) throw ConfigurationError("check_lower_bound: family and model grids differ");
    if (phi && phi->size() != g.size()) throw ConfigurationError("check_lower_bound: phi has the wrong size");
    const int n = model.n();
    const double d = model.degree();
    const auto F = family.values();
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = g.node(i);
        // n s - (n-1) log psi' - log psi'' with the cancellation between n s and log psi' removed
        q[i] = (n + 1) * softplus(s) - n * std::log(d) - std::log(F[i]);
        if (phi) q[i] += t * (*phi)[i];
    }
    const RadialPotential qp(g, n, std::move(q));
    const RadialPotential p1 = fubini_study_potential(n, 1.0, g);
    LowerBoundReport r;
    r.eta = dominance_margin(qp, p1);
    r.positive = r.eta > 0.0;
    return r;
}

std::optional<double> divisor_positivity_threshold(const KahlerModel& model, double eps, double t,
                                                   std::span<const double> phi,
                                                   std::span<const double> deltas) {
    std::optional<double> best;
    double prev = -std::numeric_limits<double>::infinity();
    for (double delta : deltas) {
        if (!(delta > prev)) throw ConfigurationError("divisor threshold: delta list must be increasing");
        prev = delta;
        if (delta >= model.n()) break;
        const RhsFamily f = build_divisor_rhs(delta, eps, model);
        const auto phi_opt = phi.empty() ? std::nullopt : std::optional<std::span<const double>>(phi);
        if (!check_lower_bound(f, model, t, phi_opt).positive) break;
        best = delta;
    }
    return best;
}

}  // namespace cmalab
