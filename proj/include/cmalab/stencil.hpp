#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace cmalab::stencil {

// Fourth-order finite differences on a uniform grid. Interior nodes use the
// centred five-point formulas, the two outermost nodes at each end use
// one-sided formulas of the same order.
inline constexpr std::size_t min_points = 7;
inline constexpr std::size_t max_width = 6;

struct Row {
    std::size_t first;                    // index of the first node touched
    std::size_t count;                    // number of coefficients used
    std::array<double, max_width> coeff;  // scaled by 1/(12h) or 1/(12h^2)
};

Row d1_row(std::size_t k, std::size_t points);
Row d2_row(std::size_t k, std::size_t points);

// Full-grid derivatives of f. Throws ConfigurationError for fewer than min_points nodes.
void differentiate(std::span<const double> f, double h, std::span<double> d1, std::span<double> d2);

// Rounding floor of the stencils at node k: a bound on the error caused by
// representing f in double precision.
double d1_noise(std::span<const double> f, double h, std::size_t k);
double d2_noise(std::span<const double> f, double h, std::size_t k);

// Absolute slack for positivity tests on derivatives of a computed grid
// function: covers the error that accumulates through banded solves at the
// level of machine precision relative to max |f|.
double solve_noise(std::span<const double> f);

// Error of the derivative stencils at node k caused by an absolute error of
// size delta in every value.
double d1_spread(double delta, double h, std::size_t k, std::size_t points);
double d2_spread(double delta, double h, std::size_t k, std::size_t points);

// Absolute error of grid values computed by summing or solving at scale max |u|.
double value_noise(std::span<const double> u);

}  // namespace cmalab::stencil
