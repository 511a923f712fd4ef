#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cmalab/errors.hpp"
#include "cmalab/grid.hpp"
#include "cmalab/stencil.hpp"

using namespace cmalab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid spacing and nodes", "[grid]") {
    const SGrid g(-2.0, 3.0, 11);
    CHECK(g.size() == 11);
    CHECK_THAT(g.h(), WithinRel(0.5, 1e-15));
    CHECK(g.node(0) == -2.0);
    CHECK(g.node(10) == 3.0);
    CHECK(g.nearest(0.26) == 5);
    CHECK(g.nearest(-100.0) == 0);
    CHECK(g.nearest(100.0) == 10);
    const SGrid d = default_grid();
    CHECK(d.s_min() == -40.0);
    CHECK(d.s_max() == 40.0);
    CHECK(d.size() == 4001);
}

TEST_CASE("grid rejects empty or degenerate ranges", "[grid]") {
    CHECK_THROWS_AS(SGrid(1.0, 1.0, 10), ConfigurationError);
    CHECK_THROWS_AS(SGrid(2.0, 1.0, 10), ConfigurationError);
    CHECK_THROWS_AS(SGrid(0.0, 1.0, 2), ConfigurationError);
    CHECK_THROWS_AS(SGrid(0.0, INFINITY, 10), ConfigurationError);
}

TEST_CASE("stencils are exact on quartic polynomials", "[stencil]") {
    const SGrid g(-1.0, 2.0, 31);
    std::vector<double> f(g.size()), d1(g.size()), d2(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = g.node(i);
        f[i] = 3.0 - 2.0 * s + 0.5 * s * s - 0.25 * s * s * s + 0.125 * s * s * s * s;
    }
    stencil::differentiate(f, g.h(), d1, d2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = g.node(i);
        CHECK_THAT(d1[i], WithinAbs(-2.0 + s - 0.75 * s * s + 0.5 * s * s * s, 1e-10));
        CHECK_THAT(d2[i], WithinAbs(1.0 - 1.5 * s + 1.5 * s * s, 1e-9));
    }
}

TEST_CASE("stencils converge at fourth order", "[stencil]") {
    auto error = [](std::size_t points) {
        const SGrid g(0.0, 2.0, points);
        std::vector<double> f(points), d1(points), d2(points);
        for (std::size_t i = 0; i < points; ++i) f[i] = std::sin(3.0 * g.node(i));
        stencil::differentiate(f, g.h(), d1, d2);
        double e = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
            const double s = g.node(i);
            e = std::max(e, std::abs(d1[i] - 3.0 * std::cos(3.0 * s)));
            e = std::max(e, std::abs(d2[i] + 9.0 * std::sin(3.0 * s)));
        }
        return e;
    };
    const double coarse = error(41), fine = error(81);
    // Boundary rows of the second derivative are third order; interior fourth.
    CHECK(coarse / fine > 7.0);
}

TEST_CASE("stencils need seven points", "[stencil]") {
    std::vector<double> f(6, 1.0), d1(6), d2(6);
    CHECK_THROWS_AS(stencil::differentiate(f, 0.1, d1, d2), ConfigurationError);
}

TEST_CASE("stencil rows sum to zero and have the right moments", "[stencil]") {
    const std::size_t m = 12;
    for (std::size_t k = 0; k < m; ++k) {
        const stencil::Row r1 = stencil::d1_row(k, m);
        const stencil::Row r2 = stencil::d2_row(k, m);
        double s0 = 0.0, s1 = 0.0, t0 = 0.0, t1 = 0.0, t2 = 0.0;
        for (std::size_t j = 0; j < r1.count; ++j) {
            const double x = static_cast<double>(r1.first + j) - static_cast<double>(k);
            s0 += r1.coeff[j];
            s1 += r1.coeff[j] * x;
        }
        for (std::size_t j = 0; j < r2.count; ++j) {
            const double x = static_cast<double>(r2.first + j) - static_cast<double>(k);
            t0 += r2.coeff[j];
            t1 += r2.coeff[j] * x;
            t2 += r2.coeff[j] * x * x;
        }
        CHECK_THAT(s0, WithinAbs(0.0, 1e-12));
        CHECK_THAT(s1, WithinAbs(12.0, 1e-12));
        CHECK_THAT(t0, WithinAbs(0.0, 1e-12));
        CHECK_THAT(t1, WithinAbs(0.0, 1e-12));
        CHECK_THAT(t2, WithinAbs(24.0, 1e-12));
    }
}

TEST_CASE("derivative spread scales with the perturbation", "[stencil]") {
    const double h = 0.02;
    CHECK_THAT(stencil::d1_spread(1e-12, h, 5, 100), WithinRel(1e-12 * 18.0 / (12.0 * h), 1e-12));
    CHECK_THAT(stencil::d2_spread(1e-12, h, 5, 100), WithinRel(1e-12 * 64.0 / (12.0 * h * h), 1e-12));
    const std::vector<double> u{1.0, -200.0, 3.0};
    CHECK(stencil::value_noise(u) > stencil::value_noise(std::vector<double>{1.0}));
}
