#include "cmalab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmalab/errors.hpp"
#include "cmalab/singular_rhs.hpp"
#include "cmalab/stencil.hpp"

namespace cmalab {
namespace {

std::size_t node_in(const SGrid& g, double s, const char* what) {
    if (s < g.s_min() - 0.5 * g.h() || s > g.s_max() + 0.5 * g.h()) {
        throw ConfigurationError(std::string(what) + " = " + std::to_string(s) + " lies outside the grid");
    }
    return g.nearest(s);
}

}  // namespace

ComparisonReport bt_compare(const RadialPotential& u, const RadialPotential& v, double a, double b,
                            double tolerance) {
    if (!(u.grid == v.grid) || u.n != v.n) throw ConfigurationError("comparison: potentials differ in grid or dimension");
    const SGrid& g = u.grid;
    const std::size_t ia = node_in(g, a, "comparison: a");
    const std::size_t ib = node_in(g, b, "comparison: b");
    if (ib < ia + 2) throw ConfigurationError("comparison: the subinterval needs an interior node");

    ComparisonReport r;
    const std::vector<double> mu = reduced_density(u);
    const std::vector<double> mv = reduced_density(v);
    if (u.values[ia] < v.values[ia] - tolerance) {
        r.failed_hypothesis = "u >= v at the left end";
        r.hypothesis_node = ia;
    } else if (u.values[ib] < v.values[ib] - tolerance) {
        r.failed_hypothesis = "u >= v at the right end";
        r.hypothesis_node = ib;
    } else {
        for (std::size_t i = ia + 1; i < ib; ++i) {
            if (mu[i] > mv[i] + tolerance * std::max(1.0, std::abs(mv[i]))) {
                r.failed_hypothesis = "MA(u) <= MA(v) inside";
                r.hypothesis_node = i;
                break;
            }
        }
    }
    r.hypotheses_hold = r.failed_hypothesis.empty();

    r.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = ia; i <= ib; ++i) {
        const double diff = u.values[i] - v.values[i];
        r.margin = std::min(r.margin, diff);
        if (!r.first_violation_node && diff < -tolerance) r.first_violation_node = i;
    }
    r.holds = r.margin >= -tolerance;
    return r;
}

double bootstrap_lelong_bound(std::span<const double> phi, const SGrid& grid, int n, double tau0, double gamma,
                              double w_lo, double w_hi) {
    if (!(gamma > 0.0)) throw ConfigurationError("bootstrap: gamma must be positive");
    if (!(tau0 > 0.0 && tau0 < 1.0)) throw ConfigurationError("bootstrap: tau0 must lie in (0, 1)");
    if (phi.size() != grid.size()) throw ConfigurationError("bootstrap: phi does not match the grid");
    const std::size_t lo = node_in(grid, w_lo, "bootstrap: window start");
    const std::size_t hi = node_in(grid, w_hi, "bootstrap: window end");
    if (hi < lo) throw ConfigurationError("bootstrap: empty window");
    const double a = *std::max_element(phi.begin() + static_cast<std::ptrdiff_t>(lo),
                                       phi.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    return std::exp(-tau0 * a / n) * gamma;
}

std::vector<double> bootstrap_schedule(std::span<const double> phi, const SGrid& grid, int n, double tau0,
                                       double gamma, double anchor) {
    constexpr double kWidest = 5.0;
    std::vector<double> out;
    for (double w = kWidest; w >= 4.0 * grid.h(); w *= 0.5) {
        const double end = anchor - (kWidest - w);
        if (end < grid.s_min() + grid.h()) break;
        out.push_back(bootstrap_lelong_bound(phi, grid, n, tau0, gamma, grid.s_min(), end));
    }
    return out;
}

MagnificationTable magnification_experiment(const KahlerModel& model, double gamma, double tau0,
                                            std::span<const double> eps_list, const SweepOptions& options) {
    if (!(tau0 > 0.0 && tau0 < 1.0)) throw ConfigurationError("magnification: tau0 must lie in (0, 1)");
    const std::vector<ContinuityTrace> runs =
        epsilon_members(model, gamma, EquationKind::magnifying, tau0, eps_list, options);

    MagnificationTable table;
    bool member_blowup = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RhsFamily f = build_dirac_rhs(gamma, eps_list[i], model);
        const TraceStep& last = runs[i].steps.back();
        const LelongWindow w = lelong_window(f);
        MagnificationRow row;
        row.epsilon = eps_list[i];
        row.diagnostics = last.diagnostics;
        row.nu_measured = last.diagnostics.lelong.value;
        row.nu_neutral = lelong_estimate(neutral_oracle(model, f), w.width, last.diagnostics.lelong.anchor).value;
        row.nu_bootstrap = gamma > 0.0 ? bootstrap_lelong_bound(last.phi, model.grid(), model.n(), tau0, gamma,
                                                                model.grid().s_min(), last.diagnostics.lelong.anchor)
                                       : 0.0;
        row.newton_iters = last.newton_iters;
        row.converged = runs[i].verdict != Verdict::barrier && last.converged;
        row.verdict = runs[i].verdict;
        row.t_star = runs[i].t_star;
        row.curvature_margin = check_lower_bound(f, model).eta;
        if (!(tau0 < row.curvature_margin)) table.precondition_met = false;
        if (row.verdict == Verdict::barrier && !table.t_star) table.t_star = row.t_star;
        member_blowup = member_blowup || row.verdict == Verdict::average_blowup;
        table.rows.push_back(std::move(row));
    }
    table.avg_strictly_increasing = table.rows.size() >= 2;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (!(table.rows[i].diagnostics.avg_phi > table.rows[i - 1].diagnostics.avg_phi)) {
            table.avg_strictly_increasing = false;
        }
    }
    if (table.t_star) {
        table.verdict = Verdict::barrier;
    } else if (member_blowup || table.avg_strictly_increasing) {
        table.verdict = Verdict::average_blowup;
    } else {
        table.verdict = Verdict::reached_target;
    }
    return table;
}

}  // namespace cmalab
