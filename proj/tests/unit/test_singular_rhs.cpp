#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cmalab/errors.hpp"
#include "cmalab/ma_solver.hpp"
#include "cmalab/singular_rhs.hpp"
#include "oracles.hpp"

using namespace cmalab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("xi_eps matches its closed form and decreases to s", "[rhs]") {
    for (double eps : {1e-4, 1e-2, 0.3}) {
        for (double s = -30.0; s <= 30.0; s += 0.7) {
            CHECK_THAT(xi_eps(s, eps), WithinRel(oracle::xi(s, eps), 1e-13));
            CHECK_THAT(xi_eps_d1(s, eps), WithinRel(oracle::xi_d1(s, eps), 1e-13));
            CHECK_THAT(xi_eps_d2(s, eps), WithinRel(oracle::xi_d2(s, eps), 1e-12));
            CHECK(xi_eps(s, eps) >= s);
        }
    }
    // Monotone decrease in eps toward s.
    const double s = -3.0;
    double prev = xi_eps(s, 1.0);
    for (double eps = 0.5; eps > 1e-8; eps *= 0.5) {
        const double cur = xi_eps(s, eps);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THAT(prev, WithinAbs(s, 1e-12));
    CHECK_THROWS_AS(xi_eps(0.0, 0.0), ConfigurationError);
}

TEST_CASE("normalized families carry the reference mass", "[rhs][property]") {
    const SGrid g = default_grid();
    for (int n : {1, 2}) {
        const double d = n + 1.0;
        const KahlerModel m(n, d, g);
        const double target = std::pow(d, n);
        CHECK_THAT(reduced_mass(build_constant_rhs(m)), WithinRel(target, 1e-8));
        for (double gamma : {0.0, 0.3 * d, 0.9 * d}) {
            for (double eps : {1e-1, 1e-2, 1e-3}) {
                const RhsFamily f = build_dirac_rhs(gamma, eps, m);
                CHECK(f.normalized());
                CHECK_THAT(reduced_mass(f), WithinRel(target, 1e-8));
                for (double v : f.values()) REQUIRE(v > 0.0);
            }
        }
        for (double dp : {0.0, 0.4, 0.5 * n}) {
            for (double eps : {0.0, 1e-2}) {
                CHECK_THAT(reduced_mass(build_divisor_rhs(dp, eps, m)), WithinRel(target, 1e-8));
            }
        }
    }
}

TEST_CASE("Dirac family with gamma zero is the constant family", "[rhs]") {
    const KahlerModel m(2, 3.0, default_grid());
    const RhsFamily f = build_dirac_rhs(0.0, 1e-3, m);
    for (double v : f.values()) REQUIRE(v == 1.0);
    CHECK_FALSE(f.pole_scale().has_value());
    CHECK(f.top_up() == 1.0);
}

TEST_CASE("Dirac family constraints", "[rhs]") {
    const KahlerModel m(1, 2.0, default_grid());
    CHECK_THROWS_AS(build_dirac_rhs(2.5, 1e-2, m), ConstraintViolation);
    CHECK_THROWS_AS(build_dirac_rhs(-1.0, 1e-2, m), ConfigurationError);
    CHECK_THROWS_AS(build_dirac_rhs(1.0, 0.0, m), ConfigurationError);
    const RhsFamily edge = build_dirac_rhs(2.0, 1e-2, m);
    REQUIRE(edge.warnings().size() == 1);
    CHECK(edge.top_up() >= 0.0);
    CHECK(edge.top_up() < 1e-3);
    CHECK(build_dirac_rhs(1.0, 1e-2, m).warnings().empty());
    REQUIRE(build_dirac_rhs(1.0, 1e-2, m).pole_scale().has_value());
    CHECK_THAT(*build_dirac_rhs(1.0, 1e-2, m).pole_scale(), WithinRel(2.0 * std::log(1e-2), 1e-14));
}

TEST_CASE("Dirac density has unit mass in the plane", "[rhs]") {
    for (double a : {1e-3, 0.1, 1.0}) {
        const double R = 1e4;
        const double disk = oracle::disk_mass([a](double r) { return dirac_density(a, r * r); }, R);
        CHECK_THAT(disk, WithinAbs(1.0 - a * a / (R * R + a * a), 1e-10));
    }
    CHECK_THROWS_AS(dirac_density(0.0, 1.0), ConfigurationError);
}

TEST_CASE("divisor family constraints", "[rhs]") {
    const KahlerModel m(2, 3.0, default_grid());
    CHECK_THROWS_AS(build_divisor_rhs(2.0, 1e-2, m), ConstraintViolation);
    CHECK_THROWS_AS(build_divisor_rhs(2.5, 0.0, m), ConstraintViolation);
    CHECK_THROWS_AS(build_divisor_rhs(-0.1, 0.0, m), ConfigurationError);
    CHECK_THROWS_AS(build_divisor_rhs(0.5, -1.0, m), ConfigurationError);
    const RhsFamily f = build_divisor_rhs(0.0, 0.0, m);
    for (double v : f.values()) REQUIRE(v == 1.0);
}

TEST_CASE("measure_at agrees with the stored measure", "[rhs]") {
    const KahlerModel m(2, 3.0, default_grid());
    const RhsFamily f = build_dirac_rhs(1.5, 1e-2, m);
    const auto mu = f.measure();
    for (std::size_t i = 0; i < mu.size(); i += 211) {
        CHECK_THAT(f.measure_at(m.grid().node(i)), WithinRel(mu[i], 1e-12));
    }
}

TEST_CASE("lower bound of the constant family on the anticanonical model", "[rhs]") {
    for (int n : {1, 2}) {
        const KahlerModel m(n, n + 1.0, default_grid());
        const LowerBoundReport r = check_lower_bound(build_constant_rhs(m), m);
        CHECK(r.positive);
        CHECK_THAT(r.eta, WithinAbs(n + 1.0, 1e-6));
    }
}

// For eps = 0 and phi = -c softplus(s) the exponent is
// (n + 1 - t c - delta') softplus(s) + delta' s + const, so positivity holds
// exactly for delta' < n + 1 - t c.
TEST_CASE("divisor positivity threshold matches the closed form", "[rhs]") {
    const int n = 2;
    const double t = 0.9, c = 2.0;
    const double threshold = n + 1 - t * c;  // 1.2
    const KahlerModel m(n, 3.0, default_grid());
    std::vector<double> phi(m.grid().size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = -c * softplus(m.grid().node(i));

    for (double dp : {0.0, 0.3, 0.7, 1.1}) {
        const LowerBoundReport r = check_lower_bound(build_divisor_rhs(dp, 0.0, m), m, t, phi);
        CHECK(r.positive);
        CHECK_THAT(r.eta, WithinAbs(threshold - dp, 1e-6));
    }
    CHECK_FALSE(check_lower_bound(build_divisor_rhs(1.4, 0.0, m), m, t, phi).positive);

    const std::vector<double> deltas{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75};
    const auto found = divisor_positivity_threshold(m, 0.0, t, phi, deltas);
    REQUIRE(found.has_value());
    CHECK(*found == 1.0);

    const std::vector<double> unsorted{0.5, 0.25};
    CHECK_THROWS_AS(divisor_positivity_threshold(m, 0.0, t, phi, unsorted), ConfigurationError);
}

TEST_CASE("xi_eps at the smoothing scale", "[rhs]") {
    for (double eps : {1e-3, 0.1, 2.0}) {
        const double s = 2.0 * std::log(eps);
        CHECK_THAT(xi_eps(s, eps), WithinRel(std::log(2.0 * eps * eps), 1e-13));
        CHECK_THAT(xi_eps_d1(s, eps), WithinRel(0.5, 1e-14));
        CHECK_THAT(xi_eps_d2(s, eps), WithinRel(0.25, 1e-14));
    }
}

TEST_CASE("Dirac density point values", "[rhs]") {
    const double pi = std::acos(-1.0);
    for (double a : {1.0, 0.1, 0.01}) CHECK_THAT(dirac_density(a, 0.0), WithinRel(1.0 / (pi * a * a), 1e-15));
    double prev = dirac_density(0.5, 1.0);
    for (double a = 0.25; a > 1e-6; a *= 0.5) {
        const double v = dirac_density(a, 1.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-10);
}

// The top-up is what remains after the pole part: 1 - (gamma / d)^n up to the truncation.
TEST_CASE("singular part carries the pole mass", "[rhs]") {
    for (int n : {1, 2}) {
        const double d = n + 1.0;
        const KahlerModel m(n, d, default_grid());
        for (double gamma : {0.5, 1.0, 0.9 * d}) {
            const RhsFamily f = build_dirac_rhs(gamma, 1e-3, m);
            CHECK_THAT(f.top_up(), WithinAbs(1.0 - std::pow(gamma / d, n), 1e-6));
            const auto total = f.cumulative_mass(m.grid().s_max());
            REQUIRE(total.has_value());
            CHECK_THAT(*total, WithinRel(std::pow(d, n), 1e-12));
        }
    }
}

// For delta' < n the divisor measure decays like e^{(n - delta') s}, so the
// neutral solution has no pole slope.
TEST_CASE("small divisor exponents leave no Lelong number", "[rhs]") {
    const KahlerModel m(1, 2.0, default_grid());
    for (double dp : {0.4, 0.2, 0.1}) {
        for (double eps : {0.0, 1e-3}) {
            const RhsFamily f = build_divisor_rhs(dp, eps, m);
            const RadialPotential u = neutral_oracle(m, f);
            CHECK(lelong_estimate(u, 2.0).value < 1e-6);
        }
    }
}
