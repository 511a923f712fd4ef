#include "cmalab/ma_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "cmalab/errors.hpp"
#include "cmalab/simd/kernels.hpp"
#include "cmalab/stencil.hpp"

namespace cmalab {
namespace {

constexpr std::size_t kBand = 4;
constexpr double kPositivityTol = 1e-12;
constexpr double kLelongOffset = 7.0;
constexpr double kLelongWidth = 2.0;

// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
constexpr double kGlX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Residual evaluation for a fixed (model, rhs, equation) in terms of phi = u - psi.
class System {
public:
    System(const KahlerModel& model, const RhsFamily& rhs, const Equation& eq)
        : model_(model), rhs_(rhs), eq_(eq), m_(model.grid().size()), h_(model.grid().h()),
          p1_(m_), p2_(m_), u1_(m_), u2_(m_), dens_(m_), factor_(m_) {
        if (!(rhs.grid() == model.grid()) || rhs.n() != model.n()) {
            throw ConfigurationError("solver: right-hand side was built for a different model");
        }
        if (m_ < stencil::min_points) throw ConfigurationError("solver: grid needs at least 7 points");
        if (!(eq.t >= 0.0) || !std::isfinite(eq.t)) throw ConfigurationError("solver: t must be nonnegative");
    }

    std::size_t size() const noexcept { return m_; }

    // Fills the nodal residual; returns false when it is not finite.
    bool evaluate(std::span<const double> phi, std::span<double> out) {
        stencil::differentiate(phi, h_, p1_, p2_);
        const auto& k = simd::active();
        const RadialPotential& psi = model_.psi();
        k.ma_reduced(psi.d1.data(), psi.d2.data(), p1_.data(), p2_.data(), m_, model_.n(), u1_.data(), u2_.data(),
                     dens_.data());
        const double a = eq_.exponent_sign() * eq_.t;
        for (std::size_t i = 0; i < m_; ++i) factor_[i] = a == 0.0 ? 1.0 : std::exp(a * phi[i]);
        k.residual_combine(dens_.data(), factor_.data(), rhs_.measure().data(), m_, out.data());
        out[0] = p1_[0] / h_;
        out[m_ - 1] = eq_.neumann_both_ends() ? p1_[m_ - 1] / h_ : phi[m_ - 1] / (h_ * h_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (!std::isfinite(out[i])) return false;
        }
        return true;
    }

    // Largest interior residual relative to the target term e^{sigma t phi} R;
    // boundary rows enter unscaled. Uses the state of the last evaluate().
    double relative_norm(std::span<const double> out) const {
        double worst = std::max(std::abs(out[0]), std::abs(out[m_ - 1]));
        const auto rhs = rhs_.measure();
        for (std::size_t i = 1; i + 1 < m_; ++i) {
            const double scale = std::abs(factor_[i] * rhs[i]);
            worst = std::max(worst, scale > 0.0 ? std::abs(out[i]) / scale : std::abs(out[i]));
        }
        return worst;
    }

    // Positivity of u' and u'' at interior nodes after the last evaluate().
    bool positive(std::span<const double> phi) const {
        const double slack = kPositivityTol + stencil::solve_noise(phi);
        const double delta = stencil::value_noise(model_.psi().values) + stencil::value_noise(phi);
        for (std::size_t i = 1; i + 1 < m_; ++i) {
            const double f1 = slack + stencil::d1_noise(phi, h_, i) + stencil::d1_spread(delta, h_, i, m_);
            const double f2 = slack + stencil::d2_noise(phi, h_, i) + stencil::d2_spread(delta, h_, i, m_);
            if (!(u1_[i] > -f1) || !(u2_[i] > -f2)) return false;
        }
        return true;
    }

    // Jacobian at the phi of the last evaluate().
    BandedMatrix jacobian() const {
        std::vector<double> a(m_), b(m_), c(m_);
        simd::active().linearization(u1_.data(), u2_.data(), factor_.data(), rhs_.measure().data(), m_, model_.n(),
                                     -eq_.exponent_sign() * eq_.t, a.data(), b.data(), c.data());
        const double s1 = 1.0 / (12.0 * h_);
        const double s2 = 1.0 / (12.0 * h_ * h_);
        BandedMatrix J(m_, kBand, kBand);
        for (std::size_t i = 1; i + 1 < m_; ++i) {
            const stencil::Row r1 = stencil::d1_row(i, m_);
            const stencil::Row r2 = stencil::d2_row(i, m_);
            for (std::size_t j = 0; j < r1.count; ++j) J.at(i, r1.first + j) += a[i] * r1.coeff[j] * s1;
            for (std::size_t j = 0; j < r2.count; ++j) J.at(i, r2.first + j) += b[i] * r2.coeff[j] * s2;
            J.at(i, i) += c[i];
        }
        const stencil::Row left = stencil::d1_row(0, m_);
        for (std::size_t j = 0; j < left.count; ++j) J.at(0, left.first + j) = left.coeff[j] * s1 / h_;
        if (eq_.neumann_both_ends()) {
            const stencil::Row right = stencil::d1_row(m_ - 1, m_);
            for (std::size_t j = 0; j < right.count; ++j) J.at(m_ - 1, right.first + j) = right.coeff[j] * s1 / h_;
        } else {
            J.at(m_ - 1, m_ - 1) = 1.0 / (h_ * h_);
        }
        return J;
    }

    RadialPotential potential(std::span<const double> phi) const {
        const RadialPotential& psi = model_.psi();
        std::vector<double> v(m_);
        for (std::size_t i = 0; i < m_; ++i) v[i] = psi.values[i] + phi[i];
        return RadialPotential(model_.grid(), model_.n(), std::move(v), u1_, u2_);
    }

private:
    const KahlerModel& model_;
    const RhsFamily& rhs_;
    Equation eq_;
    std::size_t m_;
    double h_;
    std::vector<double> p1_, p2_, u1_, u2_, dens_, factor_;
};

std::vector<double> perturbation(const RadialPotential& u, const KahlerModel& model) {
    if (!(u.grid == model.grid())) throw ConfigurationError("solver: potential and model grids differ");
    std::vector<double> phi(u.values.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = u.values[i] - model.psi().values[i];
    return phi;
}

double sup_norm(std::span<const double> x) { return simd::active().max_abs(x.data(), x.size()); }

}  // namespace

std::string_view to_string(EquationKind kind) noexcept {
    switch (kind) {
        case EquationKind::reducing: return "reducing";
        case EquationKind::neutral: return "neutral";
        case EquationKind::magnifying: return "magnifying";
    }
    return "neutral";
}

EquationKind parse_equation_kind(std::string_view name) {
    if (name == "reducing") return EquationKind::reducing;
    if (name == "neutral") return EquationKind::neutral;
    if (name == "magnifying") return EquationKind::magnifying;
    throw ConfigurationError("unknown equation kind '" + std::string(name) +
                             "' (expected reducing, neutral or magnifying)");
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::reached_target: return "reached_target";
        case Verdict::barrier: return "barrier";
        case Verdict::average_blowup: return "average_blowup";
    }
    return "reached_target";
}

double Equation::exponent_sign() const noexcept {
    switch (kind) {
        case EquationKind::reducing: return 1.0;
        case EquationKind::magnifying: return -1.0;
        case EquationKind::neutral: return 0.0;
    }
    return 0.0;
}

bool Equation::neumann_both_ends() const noexcept { return kind != EquationKind::neutral && t > 0.0; }

LelongWindow lelong_window(const RhsFamily& family) {
    const SGrid& g = family.grid();
    const auto pole = family.pole_scale();
    const double anchor = pole ? std::max(g.s_min(), *pole + kLelongOffset) : g.s_min();
    return {anchor, kLelongWidth};
}

std::vector<double> residual(const RadialPotential& u, const KahlerModel& model, const RhsFamily& rhs,
                             const Equation& eq) {
    System sys(model, rhs, eq);
    const std::vector<double> phi = perturbation(u, model);
    std::vector<double> out(sys.size());
    sys.evaluate(phi, out);
    return out;
}

BandedMatrix linearization(const RadialPotential& u, const KahlerModel& model, const RhsFamily& rhs,
                           const Equation& eq) {
    System sys(model, rhs, eq);
    const std::vector<double> phi = perturbation(u, model);
    std::vector<double> out(sys.size());
    sys.evaluate(phi, out);
    return sys.jacobian();
}

namespace {

// J with the diagonal pushed away from zero by mu times each row's scale, which
// keeps its sign. Large mu turns the Newton step into a pseudo-time step.
BandedMatrix shifted(const BandedMatrix& J, double mu) {
    BandedMatrix out = J;
    for (std::size_t i = 0; i < J.size(); ++i) {
        double row = 0.0;
        const std::size_t lo = i >= J.lower() ? i - J.lower() : 0;
        const std::size_t hi = std::min(J.size() - 1, i + J.upper());
        for (std::size_t j = lo; j <= hi; ++j) row = std::max(row, std::abs(J.at(i, j)));
        const double diag = J.at(i, i);
        out.at(i, i) = diag + (diag < 0.0 ? -mu : mu) * row;
    }
    return out;
}

// Shifts tried in turn when the plain Newton step is singular or cannot be damped
// into a residual decrease.
constexpr double kShifts[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1e-1};

// Extra full Newton steps after the tolerance is met, kept while they lower the
// residual relative to the size of its terms and stay within the tolerance. In
// the tails both terms decay like e^{ns}, so the absolute residual alone cannot
// resolve phi there.
void polish(System& sys, std::vector<double>& phi, std::vector<double>& g, double& r, double tol) {
    constexpr int kPolishSteps = 8;
    std::vector<double> step(phi.size()), trial(phi.size()), gt(phi.size()), neg(phi.size());
    double rel = sys.relative_norm(g);
    const std::vector<double> phi0 = phi, g0 = g;
    const double r0 = r;
    for (int k = 0; k < kPolishSteps; ++k) {
        const BandedMatrix J = sys.jacobian();
        for (std::size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
        bool solved = false;
        for (double mu : kShifts) {
            if (mu > 1e-8) break;
            if ((solved = mu == 0.0 ? J.solve(neg, step) : shifted(J, mu).solve(neg, step))) break;
        }
        if (!solved) break;
        for (std::size_t i = 0; i < phi.size(); ++i) trial[i] = phi[i] + step[i];
        if (!sys.evaluate(trial, gt)) break;
        const double rt = sup_norm(gt);
        const double relt = sys.relative_norm(gt);
        if (!(relt <= rel) || !(rt <= tol)) break;
        phi.swap(trial);
        g.swap(gt);
        r = rt;
        rel = relt;
        if (sup_norm(step) <= stencil::value_noise(phi)) break;
    }
    sys.evaluate(phi, g);
    // Intermediate iterates may dip below the positivity floor in the far tail;
    // only the final one has to pass.
    if (!sys.positive(phi)) {
        phi = phi0;
        g = g0;
        r = r0;
        sys.evaluate(phi, g);
    }
}

}  // namespace

SolveResult newton_solve(const KahlerModel& model, const RhsFamily& rhs, const Equation& eq,
                         const SolveConfig& config) {
    if (!(config.newton_tol > 0.0) || config.max_iters < 0 || config.max_halvings < 0) {
        throw ConfigurationError("solver: tolerances must be positive and iteration limits nonnegative");
    }
    System sys(model, rhs, eq);
    const std::size_t m = sys.size();
    std::vector<double> phi =
        perturbation(config.initial_guess ? *config.initial_guess : neutral_oracle(model, rhs), model);
    std::vector<double> g(m), trial(m), gt(m), step(m), neg(m);

    SolveResult res{model.psi(), {}, {}, false, 0, 0.0, false, {}};
    if (!sys.evaluate(phi, g)) {
        res.message = "initial guess gives a non-finite residual";
    }
    double r = sup_norm(g);
    if (!std::isfinite(r)) r = std::numeric_limits<double>::infinity();

    while (std::isfinite(r)) {
        if (r <= config.newton_tol) {
            res.converged = true;
            polish(sys, phi, g, r, config.newton_tol);
            break;
        }
        if (res.iterations >= config.max_iters) {
            res.message = "iteration limit reached";
            break;
        }
        const BandedMatrix J = sys.jacobian();
        for (std::size_t i = 0; i < m; ++i) neg[i] = -g[i];
        bool solvable = false, accepted = false;
        for (double mu : kShifts) {
            const bool ok = mu == 0.0 ? J.solve(neg, step) : shifted(J, mu).solve(neg, step);
            if (!ok) continue;
            solvable = true;
            double lambda = 1.0;
            for (int k = 0; k <= config.max_halvings; ++k, lambda *= 0.5) {
                for (std::size_t i = 0; i < m; ++i) trial[i] = phi[i] + lambda * step[i];
                if (!sys.evaluate(trial, gt)) continue;
                const double rt = sup_norm(gt);
                if (rt < r && sys.positive(trial)) {
                    phi.swap(trial);
                    g.swap(gt);
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            if (accepted) break;
            sys.evaluate(phi, g);
        }
        if (!solvable) {
            res.singular_jacobian = true;
            res.message = "singular linearization";
            sys.evaluate(phi, g);
            break;
        }
        ++res.iterations;
        if (!accepted) {
            res.message = "damping exhausted without decreasing the residual";
            sys.evaluate(phi, g);
            break;
        }
    }
    if (!std::isfinite(r)) {
        sys.evaluate(phi, g);
        if (res.message.empty()) res.message = "non-finite residual";
    }
    if (res.converged && !sys.positive(phi)) {
        res.converged = false;
        res.message = "converged iterate is not a Kahler potential";
    }
    res.residual_norm = r;
    res.u = sys.potential(phi);
    res.diagnostics = diagnose(phi, res.u, model, lelong_window(rhs));
    res.phi = std::move(phi);
    return res;
}

RadialPotential neutral_oracle(const KahlerModel& model, const RhsFamily& rhs) {
    if (!(rhs.grid() == model.grid()) || rhs.n() != model.n()) {
        throw ConfigurationError("neutral oracle: right-hand side was built for a different model");
    }
    const SGrid& g = model.grid();
    const std::size_t m = g.size();
    const int n = model.n();
    const double base = std::pow(model.psi().d1.front(), n);

    // Cumulative mass at the nodes, closed form when available.
    std::vector<double> cum(m, 0.0);
    const bool closed = rhs.cumulative_mass(g.s_min()).has_value();
    auto local_mass = [&](double a, double b) {
        double acc = 0.0;
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (int q = 0; q < 8; ++q) acc += kGlW[q] * rhs.measure_at(c + r * kGlX[q]);
        return n * r * acc;
    };
    for (std::size_t i = 0; i < m; ++i) {
        if (closed) {
            cum[i] = *rhs.cumulative_mass(g.node(i));
        } else if (i > 0) {
            cum[i] = cum[i - 1] + local_mass(g.node(i - 1), g.node(i));
        }
    }
    auto slope_power = [&](std::size_t cell, double s) {
        if (closed) return base + *rhs.cumulative_mass(s);
        return base + cum[cell] + local_mass(g.node(cell), s);
    };
    auto slope = [&](double p) { return n == 1 ? p : std::pow(p, 1.0 / n); };

    std::vector<double> v(m), d1(m), d2(m);
    for (std::size_t i = 0; i < m; ++i) {
        d1[i] = slope(base + cum[i]);
        const double mu = rhs.measure_at(g.node(i));
        d2[i] = n == 1 ? mu : mu / std::pow(d1[i], n - 1);
    }
    v[m - 1] = model.psi().values[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        const double a = g.node(i), b = g.node(i + 1);
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) acc += kGlW[q] * slope(slope_power(i, c + r * kGlX[q]));
        v[i] = v[i + 1] - r * acc;
    }
    return RadialPotential(g, n, std::move(v), std::move(d1), std::move(d2));
}

ContinuityTrace continuity_in_t(const KahlerModel& model, const RhsFamily& rhs, EquationKind kind, double t_target,
                                const Stepping& stepping) {
    if (!(t_target >= 0.0) || !(t_target < 1.0)) {
        throw ConfigurationError("continuity: t_target must lie in [0, 1)");
    }
    if (!(stepping.dt_initial > 0.0) || !(stepping.dt_min > 0.0) || !(stepping.growth >= 1.0)) {
        throw ConfigurationError("continuity: step controls must be positive with growth >= 1");
    }
    ContinuityTrace trace;
    auto record = [&](double t, const SolveResult& r) {
        trace.steps.push_back({t, r.diagnostics, r.converged, r.iterations, r.phi});
    };

    SolveConfig cfg = stepping.solve;
    cfg.initial_guess = neutral_oracle(model, rhs);
    SolveResult current = newton_solve(model, rhs, {kind, 0.0}, cfg);
    record(0.0, current);
    if (!current.converged) {
        trace.verdict = Verdict::barrier;
        trace.t_star = 0.0;
        return trace;
    }
    if (kind == EquationKind::neutral) return trace;

    double t = 0.0;
    double dt = stepping.dt_initial;
    while (t < t_target) {
        const double t_next = std::min(t + dt, t_target);
        cfg.initial_guess = current.u;
        SolveResult next = newton_solve(model, rhs, {kind, t_next}, cfg);
        if (next.converged) {
            t = t_next;
            current = std::move(next);
            record(t, current);
            if (current.diagnostics.avg_phi > stepping.blowup_threshold) {
                trace.verdict = Verdict::average_blowup;
                return trace;
            }
            dt *= stepping.growth;
        } else {
            dt *= 0.5;
            if (dt < stepping.dt_min) {
                trace.verdict = Verdict::barrier;
                trace.t_star = t;
                return trace;
            }
        }
    }
    trace.verdict = Verdict::reached_target;
    return trace;
}

std::vector<ContinuityTrace> epsilon_members(const KahlerModel& model, double gamma, EquationKind kind,
                                             double tau0, std::span<const double> eps_list,
                                             const SweepOptions& options) {
    if (eps_list.empty()) throw ConfigurationError("sweep: epsilon list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw ConfigurationError("sweep: epsilon values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
            throw ConfigurationError("sweep: epsilon list must be strictly decreasing");
        }
    }
    if (kind != EquationKind::neutral && !(tau0 >= 0.0 && tau0 < 1.0)) {
        throw ConfigurationError("sweep: tau0 must lie in [0, 1)");
    }
    // Validate the family parameters before any solve starts.
    (void)build_dirac_rhs(gamma, eps_list.front(), model);

    std::vector<ContinuityTrace> runs(eps_list.size());
    std::vector<std::exception_ptr> errors(eps_list.size());
    auto work = [&](std::size_t i) {
        try {
            const RhsFamily f = build_dirac_rhs(gamma, eps_list[i], model);
            runs[i] = continuity_in_t(model, f, kind, kind == EquationKind::neutral ? 0.0 : tau0, options.stepping);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.workers;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(eps_list.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < eps_list.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < eps_list.size(); i = next++) work(i);
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return runs;
}

ContinuityTrace sweep_epsilon(const KahlerModel& model, double gamma, EquationKind kind, double tau0,
                              std::span<const double> eps_list, const SweepOptions& options) {
    const std::vector<ContinuityTrace> runs = epsilon_members(model, gamma, kind, tau0, eps_list, options);

    ContinuityTrace out;
    bool increasing = true;
    bool member_blowup = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        TraceStep step = runs[i].steps.back();
        step.param = eps_list[i];
        if (runs[i].verdict == Verdict::barrier) {
            step.converged = false;
            if (!out.t_star) out.t_star = runs[i].t_star;
        }
        member_blowup = member_blowup || runs[i].verdict == Verdict::average_blowup;
        if (!out.steps.empty() && !(step.diagnostics.avg_phi > out.steps.back().diagnostics.avg_phi)) increasing = false;
        out.steps.push_back(std::move(step));
    }
    if (out.t_star) {
        out.verdict = Verdict::barrier;
    } else if (member_blowup ||
               (increasing && out.steps.back().diagnostics.avg_phi > options.stepping.blowup_threshold)) {
        out.verdict = Verdict::average_blowup;
    } else {
        out.verdict = Verdict::reached_target;
    }
    return out;
}

}  // namespace cmalab
