#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmalab/radial_geometry.hpp"

namespace cmalab {

enum class RhsKind { constant, dirac_approx, divisor };

// Right-hand side F on a model grid, stored together with the reduced measure
// F (psi')^(n-1) psi'' that the solver integrates against.
class RhsFamily {
public:
    RhsKind kind() const noexcept { return kind_; }
    double gamma() const noexcept { return gamma_; }
    double epsilon() const noexcept { return epsilon_; }
    double delta_prime() const noexcept { return delta_prime_; }
    bool normalized() const noexcept { return normalized_; }
    int n() const noexcept { return n_; }
    double degree() const noexcept { return degree_; }
    const SGrid& grid() const noexcept { return grid_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> measure() const noexcept { return measure_; }

    // Smooth top-up c for dirac_approx, normalizing constant for divisor, 1 otherwise.
    double top_up() const noexcept { return top_up_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    // 2 log(eps) for families concentrating at the pole; empty when F is smooth
    // at a fixed scale (constant, gamma = 0, delta' = 0, eps = 0 divisor).
    std::optional<double> pole_scale() const noexcept;

    // F (psi')^(n-1) psi'' at an arbitrary s.
    double measure_at(double s) const;
    // n * integral of the measure over [s_min, s], when a closed form exists.
    std::optional<double> cumulative_mass(double s) const;

    friend RhsFamily build_constant_rhs(const KahlerModel&);
    friend RhsFamily build_dirac_rhs(double, double, const KahlerModel&);
    friend RhsFamily build_divisor_rhs(double, double, const KahlerModel&);

private:
    RhsFamily(RhsKind kind, const KahlerModel& model);

    RhsKind kind_;
    double gamma_ = 0.0;
    double epsilon_ = 0.0;
    double delta_prime_ = 0.0;
    bool normalized_ = false;
    int n_;
    double degree_;
    SGrid grid_;
    std::vector<double> values_;
    std::vector<double> measure_;
    double top_up_ = 1.0;
    std::vector<std::string> warnings_;
};

// a^2 / (pi (r2 + a^2)^2)
double dirac_density(double a, double r2);

// xi_eps(s) = log(e^s + eps^2) and its first two derivatives in s.
double xi_eps(double s, double eps);
double xi_eps_d1(double s, double eps) noexcept;
double xi_eps_d2(double s, double eps) noexcept;

RhsFamily build_constant_rhs(const KahlerModel& model);
RhsFamily build_dirac_rhs(double gamma, double eps, const KahlerModel& model);
RhsFamily build_divisor_rhs(double delta_prime, double eps, const KahlerModel& model);

// Reduced mass n * trapezoid(measure) of a family.
double reduced_mass(const RhsFamily& family);

struct LowerBoundReport {
    bool positive = false;
    double eta = 0.0;
};

// Largest eta with q - eta*psi_FS(1) plurisubharmonic, where
// q = -log(F e^{-ns} (psi')^(n-1) psi'') + t*phi.
LowerBoundReport check_lower_bound(const RhsFamily& family, const KahlerModel& model, double t = 0.0,
                                   std::optional<std::span<const double>> phi = std::nullopt);

// Largest delta' in the increasing list such that the divisor family passes
// check_lower_bound for it and for every smaller entry. Empty if the first fails.
std::optional<double> divisor_positivity_threshold(const KahlerModel& model, double eps, double t,
                                                   std::span<const double> phi,
                                                   std::span<const double> deltas);

}  // namespace cmalab
