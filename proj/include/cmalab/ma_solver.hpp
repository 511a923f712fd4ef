#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmalab/banded.hpp"
#include "cmalab/radial_geometry.hpp"
#include "cmalab/singular_rhs.hpp"

namespace cmalab {

enum class EquationKind { reducing, neutral, magnifying };

std::string_view to_string(EquationKind kind) noexcept;
EquationKind parse_equation_kind(std::string_view name);

struct Equation {
    EquationKind kind = EquationKind::neutral;
    double t = 0.0;

    // +1 for e^{+t phi}, -1 for e^{-t phi}, 0 when the factor is identically 1.
    double exponent_sign() const noexcept;
    // Neumann data at both ends; otherwise Neumann at s_min and phi(s_max) = 0.
    bool neumann_both_ends() const noexcept;
};

struct SolveConfig {
    double newton_tol = 1e-10;
    int max_iters = 50;
    int max_halvings = 20;
    // Starting potential u; the neutral oracle when absent.
    std::optional<RadialPotential> initial_guess;
};

struct SolveResult {
    RadialPotential u;
    std::vector<double> phi;
    Diagnostics diagnostics;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    bool singular_jacobian = false;
    std::string message;
};

// Where the Lelong proxy is read for solutions with right-hand side F.
LelongWindow lelong_window(const RhsFamily& family);

// Nodal residual of the reduced equation; the first and last entries hold the
// boundary conditions.
std::vector<double> residual(const RadialPotential& u, const KahlerModel& model, const RhsFamily& rhs,
                             const Equation& eq);

// Newton linearization of residual() at u.
BandedMatrix linearization(const RadialPotential& u, const KahlerModel& model, const RhsFamily& rhs,
                           const Equation& eq);

SolveResult newton_solve(const KahlerModel& model, const RhsFamily& rhs, const Equation& eq,
                         const SolveConfig& config = {});

// Neutral solution by quadrature: u'(s)^n = psi'(s_min)^n + n int_{s_min}^s F d(psi'^n)/n,
// normalized by u(s_max) = psi(s_max). Carries exact derivatives.
RadialPotential neutral_oracle(const KahlerModel& model, const RhsFamily& rhs);

enum class Verdict { reached_target, barrier, average_blowup };
std::string_view to_string(Verdict v) noexcept;

struct Stepping {
    double dt_initial = 0.05;
    double dt_min = 1e-6;
    double growth = 1.5;
    double blowup_threshold = 50.0;
    SolveConfig solve;
};

struct TraceStep {
    double param = 0.0;
    Diagnostics diagnostics;
    bool converged = false;
    int newton_iters = 0;
    std::vector<double> phi;
};

struct ContinuityTrace {
    std::vector<TraceStep> steps;
    std::optional<double> t_star;
    Verdict verdict = Verdict::reached_target;
};

ContinuityTrace continuity_in_t(const KahlerModel& model, const RhsFamily& rhs, EquationKind kind,
                                double t_target, const Stepping& stepping = {});

struct SweepOptions {
    Stepping stepping;
    unsigned workers = 0;  // 0: hardware concurrency
};

// Full continuity trace for each eps, computed concurrently and returned in input order.
std::vector<ContinuityTrace> epsilon_members(const KahlerModel& model, double gamma, EquationKind kind,
                                             double tau0, std::span<const double> eps_list,
                                             const SweepOptions& options = {});

// One solve per eps (strictly decreasing). Steps carry param = eps.
ContinuityTrace sweep_epsilon(const KahlerModel& model, double gamma, EquationKind kind, double tau0,
                              std::span<const double> eps_list, const SweepOptions& options = {});

}  // namespace cmalab
