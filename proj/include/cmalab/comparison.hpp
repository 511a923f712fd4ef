#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmalab/ma_solver.hpp"
#include "cmalab/radial_geometry.hpp"

namespace cmalab {

struct ComparisonReport {
    bool hypotheses_hold = false;
    std::string failed_hypothesis;  // empty when the hypotheses hold
    std::optional<std::size_t> hypothesis_node;
    bool holds = false;             // margin >= -tolerance
    std::optional<std::size_t> first_violation_node;
    double margin = 0.0;            // min of u - v over [a, b]
};

// Bedford-Taylor comparison on the radial interval [a, b]: u >= v at both ends
// and MA(u) <= MA(v) inside should give u >= v throughout.
ComparisonReport bt_compare(const RadialPotential& u, const RadialPotential& v, double a, double b,
                            double tolerance = 1e-9);

// e^{-tau0 A / n} gamma with A the maximum of phi over the nodes of [w_lo, w_hi].
double bootstrap_lelong_bound(std::span<const double> phi, const SGrid& grid, int n, double tau0,
                              double gamma, double w_lo, double w_hi);

// Bounds for the windows [s_min, anchor - (5 - w)] with w halving from 5 down to 4h.
std::vector<double> bootstrap_schedule(std::span<const double> phi, const SGrid& grid, int n,
                                       double tau0, double gamma, double anchor);

struct MagnificationRow {
    double epsilon = 0.0;
    Diagnostics diagnostics;
    double nu_measured = 0.0;
    double nu_neutral = 0.0;
    double nu_bootstrap = 0.0;
    int newton_iters = 0;
    bool converged = false;
    Verdict verdict = Verdict::reached_target;
    std::optional<double> t_star;
    double curvature_margin = 0.0;  // check_lower_bound eta of the family
};

struct MagnificationTable {
    std::vector<MagnificationRow> rows;
    Verdict verdict = Verdict::reached_target;
    std::optional<double> t_star;
    bool precondition_met = true;  // tau0 < eta for every row
    bool avg_strictly_increasing = false;
};

MagnificationTable magnification_experiment(const KahlerModel& model, double gamma, double tau0,
                                            std::span<const double> eps_list,
                                            const SweepOptions& options = {});

}  // namespace cmalab
