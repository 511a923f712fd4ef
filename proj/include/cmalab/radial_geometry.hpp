#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cmalab/grid.hpp"

namespace cmalab {

// Grid function u(s) standing for a rotationally symmetric potential on P^n.
// When the first and second derivatives are known exactly (closed forms, or a
// solver that assembles them from exact reference derivatives) they are carried
// along in d1/d2; otherwise both are empty and finite differences are used.
struct RadialPotential {
    SGrid grid;
    int n = 1;
    std::vector<double> values;
    std::vector<double> d1;
    std::vector<double> d2;

    RadialPotential(SGrid g, int dim, std::vector<double> v);
    RadialPotential(SGrid g, int dim, std::vector<double> v, std::vector<double> first,
                    std::vector<double> second);

    bool has_exact_derivatives() const noexcept { return !d1.empty(); }
};

struct Derivatives {
    std::vector<double> d1;
    std::vector<double> d2;
};

Derivatives derivatives(const RadialPotential& u);

class KahlerModel {
public:
    // Fubini-Study model of degree d on P^n.
    KahlerModel(int n, double degree, const SGrid& grid);

    int n() const noexcept { return n_; }
    double degree() const noexcept { return degree_; }
    const SGrid& grid() const noexcept { return psi_.grid; }
    const RadialPotential& psi() const noexcept { return psi_; }

    // (psi')^(n-1) psi'' on the nodes.
    std::span<const double> volume_density() const noexcept { return vol_; }
    // Reduced mass of psi: psi'(s_max)^n - psi'(s_min)^n.
    double reference_mass() const noexcept { return mass_; }

private:
    int n_;
    double degree_;
    RadialPotential psi_;
    std::vector<double> vol_;
    double mass_;
};

struct LelongEstimate {
    double value = 0.0;
    double window_width = 0.0;
    double sensitivity = 0.0;
    double anchor = 0.0;
};

struct Diagnostics {
    double sup_phi = 0.0;
    double inf_phi = 0.0;
    double avg_phi = 0.0;
    LelongEstimate lelong;
    double mass = 0.0;
};

struct DominanceReport {
    bool holds = true;
    std::optional<std::size_t> first_violation;
    int violated_order = 0;  // 1 or 2 when a violation was found
    double min_first = 0.0;  // smallest (q-p)' over the grid
    double min_second = 0.0; // smallest (q-p)'' over the interior
};

// Numerically stable logistic function and log(1 + e^s).
double logistic(double s) noexcept;
double softplus(double s) noexcept;

RadialPotential fubini_study_potential(int n, double degree, const SGrid& grid);

// e^{-ns} (u')^(n-1) u''
std::vector<double> ma_density(const RadialPotential& u);
// (u')^(n-1) u'', the density against ds after removing e^{-ns}.
std::vector<double> reduced_density(const RadialPotential& u);

double mass(const RadialPotential& u);

// -log(e^{-ns} (u')^(n-1) u''). Throws DegeneracyError at the first node with u' <= 0 or u'' <= 0.
std::vector<double> ricci_potential(const RadialPotential& u);

// Checks (q-p)' >= -tol and (q-p)'' >= -tol at every node, with the stencil
// rounding floor added to tol.
DominanceReport dominates(const RadialPotential& q, const RadialPotential& p, double tol = 1e-12);

// Largest eta >= 0 with dominates(q, eta * p); p must be strictly convex and increasing.
double dominance_margin(const RadialPotential& q, const RadialPotential& p, double tol = 1e-12);

// Volume-weighted trapezoid mean of phi against the reference volume density.
double average(std::span<const double> phi, const KahlerModel& model);

// Secant slope of u on [anchor, anchor + window]; anchor defaults to s_min.
LelongEstimate lelong_estimate(const RadialPotential& u, double window,
                               std::optional<double> anchor = std::nullopt);

// Discrete positivity of u' and u'' up to the stencil rounding floor.
// Returns the first failing node, if any.
std::optional<std::size_t> first_nonconvex_node(const RadialPotential& u, double tol = 1e-12);

struct LelongWindow {
    double anchor;
    double width;
};

Diagnostics diagnose(std::span<const double> phi, const RadialPotential& u, const KahlerModel& model,
                     const LelongWindow& window);

}  // namespace cmalab
