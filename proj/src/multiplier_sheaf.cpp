#include "cmalab/multiplier_sheaf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmalab/errors.hpp"
#include "cmalab/ma_solver.hpp"

namespace cmalab {
namespace {

double log_add(double a, double b) noexcept {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log of int_0^L e^{lambda x} dx for any sign of lambda.
double log_tail(double lambda, double length) noexcept {
    if (length <= 0.0) return -std::numeric_limits<double>::infinity();
    if (lambda == 0.0) return std::log(length);
    const double x = lambda * length;
    if (lambda > 0.0) return x + std::log(-std::expm1(-x)) - std::log(lambda);
    return std::log(-std::expm1(x)) - std::log(-lambda);
}

void require_grid(std::span<const double> phi, const KahlerModel& model) {
    if (phi.size() != model.grid().size()) {
        throw ConfigurationError("multiplier: phi has " + std::to_string(phi.size()) + " values, grid has " +
                                 std::to_string(model.grid().size()));
    }
}

}  // namespace

CrucialIntegral crucial_integral(std::span<const double> phi, double tau, const RhsFamily& rhs,
                                 const KahlerModel& model) {
    require_grid(phi, model);
    if (!(rhs.grid() == model.grid())) throw ConfigurationError("crucial integral: family grid differs");
    const double avg = average(phi, model);
    const SGrid& g = model.grid();
    const auto mu = rhs.measure();
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = (i == 0 || i + 1 == g.size() ? 0.5 : 1.0) * g.h() * model.n();
        if (!(mu[i] > 0.0)) continue;
        acc = log_add(acc, std::log(w * mu[i]) - tau * (phi[i] - avg));
    }
    return {acc, std::exp(acc)};
}

GermIntegral germ_integral(int k, std::span<const double> phi, double tau, const KahlerModel& model,
                           const GermOptions& options) {
    if (k < 0) throw ConfigurationError("germ integral: vanishing order must be nonnegative");
    require_grid(phi, model);
    const SGrid& g = model.grid();
    const int n = model.n();
    const double start = options.anchor.value_or(g.s_min());
    const std::size_t i0 = g.nearest(start);
    const std::size_t iw = std::min(g.size() - 1, i0 + static_cast<std::size_t>(std::llround(options.slope_window / g.h())));
    if (iw <= i0 || !(options.upper > g.node(i0))) {
        throw ConfigurationError("germ integral: window or upper limit outside the grid");
    }
    const double avg = average(phi, model);

    GermIntegral r;
    r.left_slope = (phi[iw] - phi[i0]) / (g.node(iw) - g.node(i0));
    r.tail_exponent = k + n - tau * r.left_slope;

    double grid_part = -std::numeric_limits<double>::infinity();
    const std::size_t iu = std::min(g.size() - 1, g.nearest(options.upper));
    for (std::size_t i = i0; i <= iu; ++i) {
        const double w = (i == i0 || i == iu ? 0.5 : 1.0) * g.h();
        grid_part = log_add(grid_part, std::log(w) + (k + n) * g.node(i) - tau * (phi[i] - avg));
    }
    const double log_c = (k + n) * g.node(i0) - tau * (phi[i0] - avg);
    for (int j = 0; j <= options.extensions; ++j) {
        const double tail = log_c + log_tail(r.tail_exponent, j * options.extension_length);
        r.log_values.push_back(log_add(grid_part, tail));
    }
    for (std::size_t j = 1; j < r.log_values.size(); ++j) {
        r.max_growth = std::max(r.max_growth, std::exp(r.log_values[j] - r.log_values[j - 1]));
    }
    r.divergent = r.tail_exponent <= options.borderline || r.max_growth >= options.growth_factor;
    return r;
}

int minimal_vanishing_order(double tau_nu, int n, double borderline) {
    const double x = tau_nu - n;
    if (x < -borderline) return 0;
    return static_cast<int>(std::floor(x + borderline)) + 1;
}

StalkDescriptor stalk_from_sequence(const PotentialSequence& seq) {
    if (seq.entries.empty()) throw ConfigurationError("stalk: the potential sequence is empty");
    const KahlerModel& model = seq.model;
    const int n = model.n();
    StalkDescriptor d;
    std::vector<double> slopes;
    std::vector<LelongWindow> windows;
    for (const SequenceEntry& e : seq.entries) {
        require_grid(e.phi, model);
        if (!(e.tau > 0.0 && e.tau < 1.0)) throw ConfigurationError("stalk: tau must lie in (0, 1)");
        std::vector<double> u(e.phi.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = model.psi().values[i] + e.phi[i];
        const LelongWindow w = lelong_window(e.rhs);
        const LelongEstimate nu = lelong_estimate(RadialPotential(model.grid(), n, std::move(u)), w.width, w.anchor);
        d.tau_nu_product = std::max(d.tau_nu_product, e.tau * nu.value);
        windows.push_back(w);
    }
    d.k_min = minimal_vanishing_order(d.tau_nu_product, n);
    d.nontrivial = d.k_min >= 1;
    d.equals_maximal_ideal = d.k_min == 1;

    // Germ integrals with the pole region idealized by its secant continuation
    // must be finite at k_min for every entry.
    for (std::size_t i = 0; i < seq.entries.size(); ++i) {
        GermOptions opt;
        opt.anchor = windows[i].anchor;
        opt.slope_window = windows[i].width;
        opt.upper = std::max(0.0, windows[i].anchor + 2.0 * windows[i].width);
        if (opt.upper >= model.grid().s_max()) opt.upper = model.grid().s_max();
        const SequenceEntry& e = seq.entries[i];
        if (germ_integral(d.k_min, e.phi, e.tau, model, opt).divergent) d.germ_check_consistent = false;
    }
    return d;
}

TrivialLemmaReport trivial_lemma_report(const StalkDescriptor& stalk, double curvature_margin) {
    TrivialLemmaReport r;
    r.nontrivial = stalk.nontrivial;
    r.curvature_bound = curvature_margin > 0.0;
    r.maximal_ideal_excluded = !stalk.equals_maximal_ideal;
    r.all_checkable_pass = r.nontrivial && r.curvature_bound && r.maximal_ideal_excluded;
    if (!r.nontrivial) r.notes.push_back("trivial stalk: no subvariety is cut out at the pole");
    if (!r.curvature_bound) {
        r.notes.push_back("no common positive curvature lower bound (margin " + std::to_string(curvature_margin) +
                          "); without it the conclusion can fail, e.g. for a smooth elliptic curve");
    }
    if (stalk.equals_maximal_ideal) {
        r.notes.push_back("stalk equals the maximal ideal at the pole; strict containment is required");
    }
    r.notes.push_back("the rational-curve conclusion is not evaluated numerically");
    return r;
}

}  // namespace cmalab
