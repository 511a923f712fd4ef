#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cmalab/errors.hpp"
#include "cmalab/multiplier_sheaf.hpp"

using namespace cmalab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Potential with slope nu at the pole and bounded elsewhere.
std::vector<double> pole_potential(const SGrid& g, double nu) {
    std::vector<double> phi(g.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = -nu * softplus(-g.node(i));
    return phi;
}

PotentialSequence sequence(const KahlerModel& m, std::vector<std::pair<double, double>> tau_nu) {
    PotentialSequence seq{m, {}};
    for (const auto& [tau, nu] : tau_nu) {
        seq.entries.push_back({pole_potential(m.grid(), nu), tau, build_constant_rhs(m)});
    }
    return seq;
}

}  // namespace

TEST_CASE("minimal vanishing order", "[multiplier]") {
    CHECK(minimal_vanishing_order(0.5, 1) == 0);
    CHECK(minimal_vanishing_order(1.0, 1) == 1);  // borderline counts as divergent
    CHECK(minimal_vanishing_order(1.5, 1) == 1);
    CHECK(minimal_vanishing_order(3.5, 1) == 3);
    CHECK(minimal_vanishing_order(5.25, 1) == 5);
    CHECK(minimal_vanishing_order(3.5, 2) == 2);
    for (int n : {1, 2, 3}) {
        int prev = 0;
        for (double x = 0.0; x < 8.0; x += 0.125) {
            const int k = minimal_vanishing_order(x, n);
            CHECK(k >= prev);
            CHECK(k + n > x);
            if (k > 0) CHECK_FALSE(k - 1 + n > x + 1e-9);
            prev = k;
        }
    }
}

TEST_CASE("germ integral tail exponent and divergence", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    const double tau = 0.5, nu = 7.0;  // tau * nu = 3.5
    const std::vector<double> phi = pole_potential(m.grid(), nu);
    GermOptions opt;
    opt.upper = 0.0;
    for (int k = 0; k <= 4; ++k) {
        const GermIntegral gi = germ_integral(k, phi, tau, m, opt);
        CHECK_THAT(gi.left_slope, WithinAbs(nu, 1e-9));
        CHECK_THAT(gi.tail_exponent, WithinAbs(k + 1 - 3.5, 1e-8));
        CHECK(gi.divergent == (k + 1 <= 3.5));
        CHECK(gi.log_values.size() == 3);
    }
    CHECK_THROWS_AS(germ_integral(-1, phi, tau, m, opt), ConfigurationError);
}

// Convergence in a vanishing order only improves with k and only worsens with tau.
TEST_CASE("germ divergence is monotone in k and tau", "[multiplier][property]") {
    const KahlerModel m(1, 2.0, default_grid());
    const std::vector<double> phi = pole_potential(m.grid(), 4.0);
    GermOptions opt;
    opt.upper = 0.0;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        bool seen_convergent = false;
        for (int k = 0; k <= 5; ++k) {
            const bool div = germ_integral(k, phi, tau, m, opt).divergent;
            if (seen_convergent) CHECK_FALSE(div);
            seen_convergent = seen_convergent || !div;
        }
    }
    for (int k = 0; k <= 3; ++k) {
        bool seen_divergent = false;
        for (double tau = 0.05; tau < 1.0; tau += 0.05) {
            const bool div = germ_integral(k, phi, tau, m, opt).divergent;
            if (seen_divergent) CHECK(div);
            seen_divergent = seen_divergent || div;
        }
    }
}

// For n = 1, d = 2 and phi = a * logistic(s): the average of phi is a/2 and
// the integral is 2 e^{tau a / 2} (1 - e^{-tau a}) / (tau a).
TEST_CASE("crucial integral matches its closed form", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    const RhsFamily f = build_constant_rhs(m);
    for (double a : {-3.0, 0.5, 4.0}) {
        for (double tau : {0.2, 0.9}) {
            std::vector<double> phi(m.grid().size());
            for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = a * logistic(m.grid().node(i));
            const double x = tau * a;
            const double expected = 2.0 * std::exp(0.5 * x) * (-std::expm1(-x)) / x;
            const CrucialIntegral ci = crucial_integral(phi, tau, f, m);
            CHECK_THAT(ci.value, WithinRel(expected, 1e-8));
            CHECK_THAT(ci.log_value, WithinAbs(std::log(expected), 1e-8));
        }
    }
}

TEST_CASE("crucial integral survives extreme exponents", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    std::vector<double> phi(m.grid().size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = 5000.0 * logistic(m.grid().node(i));
    const CrucialIntegral ci = crucial_integral(phi, 0.9, build_constant_rhs(m), m);
    CHECK(std::isfinite(ci.log_value));
    CHECK(std::isinf(ci.value));
}

TEST_CASE("stalk classification follows the threshold", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    for (double tn : {0.5, 2.0, 3.5, 5.25}) {
        const StalkDescriptor st = stalk_from_sequence(sequence(m, {{0.5, tn / 0.5}}));
        CHECK_THAT(st.tau_nu_product, WithinRel(tn, 1e-6));
        CHECK(st.k_min == minimal_vanishing_order(tn, 1));
        CHECK(st.nontrivial == (st.k_min >= 1));
        CHECK(st.equals_maximal_ideal == (st.k_min == 1));
        CHECK(st.germ_check_consistent);
    }
}

TEST_CASE("stalk is invariant under reordering of the sequence", "[multiplier][property]") {
    const KahlerModel m(1, 2.0, default_grid());
    std::vector<std::pair<double, double>> entries{{0.5, 3.0}, {0.25, 10.0}, {0.8, 2.0}};
    const StalkDescriptor ref = stalk_from_sequence(sequence(m, entries));
    std::sort(entries.begin(), entries.end());
    do {
        const StalkDescriptor st = stalk_from_sequence(sequence(m, entries));
        CHECK(st.k_min == ref.k_min);
        CHECK(st.tau_nu_product == ref.tau_nu_product);
        CHECK(st.germ_check_consistent == ref.germ_check_consistent);
    } while (std::next_permutation(entries.begin(), entries.end()));
    CHECK(ref.k_min == 2);  // max tau * nu is 2.5
}

TEST_CASE("stalk rejects bad sequences", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    CHECK_THROWS_AS(stalk_from_sequence(PotentialSequence{m, {}}), ConfigurationError);
    CHECK_THROWS_AS(stalk_from_sequence(sequence(m, {{1.0, 2.0}})), ConfigurationError);
}

TEST_CASE("lemma report never claims its conclusion", "[multiplier]") {
    StalkDescriptor st;
    st.k_min = 1;
    st.nontrivial = true;
    st.equals_maximal_ideal = true;
    const TrivialLemmaReport maximal = trivial_lemma_report(st, 2.0);
    CHECK_FALSE(maximal.conclusion_claimed);
    CHECK(maximal.nontrivial);
    CHECK(maximal.curvature_bound);
    CHECK_FALSE(maximal.maximal_ideal_excluded);
    CHECK_FALSE(maximal.all_checkable_pass);
    CHECK_FALSE(maximal.notes.empty());

    st.k_min = 3;
    st.equals_maximal_ideal = false;
    const TrivialLemmaReport good = trivial_lemma_report(st, 2.0);
    CHECK(good.all_checkable_pass);
    CHECK_FALSE(good.conclusion_claimed);

    const TrivialLemmaReport flat = trivial_lemma_report(st, 0.0);
    CHECK_FALSE(flat.curvature_bound);
    CHECK_FALSE(flat.all_checkable_pass);

    StalkDescriptor trivial;
    CHECK_FALSE(trivial_lemma_report(trivial, 2.0).all_checkable_pass);
}

TEST_CASE("crucial integral of the constant data is the total mass", "[multiplier]") {
    for (int n : {1, 2}) {
        const KahlerModel m(n, 2.5, default_grid());
        const std::vector<double> zero(m.grid().size(), 0.0);
        CHECK_THAT(crucial_integral(zero, 0.7, build_constant_rhs(m), m).value, WithinRel(std::pow(2.5, n), 1e-8));
    }
}

// The integrand behaves like e^{(n - tau nu) s} at the pole.
TEST_CASE("crucial integral grows with the domain exactly when tau nu >= n", "[multiplier]") {
    auto value = [](double s_min, double tau, double nu) {
        const KahlerModel m(1, 2.0, SGrid(s_min, 40.0, static_cast<std::size_t>(std::llround((40.0 - s_min) / 0.02)) + 1));
        return crucial_integral(pole_potential(m.grid(), nu), tau, build_constant_rhs(m), m).log_value;
    };
    const double stable = value(-60.0, 0.5, 1.0) - value(-40.0, 0.5, 1.0);
    const double growing = value(-60.0, 0.5, 3.0) - value(-40.0, 0.5, 3.0);
    CHECK(std::abs(stable) < 1e-6);
    CHECK(growing > std::log(5.0));
}

TEST_CASE("germ integral examples", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    GermOptions opt;
    opt.upper = 0.0;
    const std::vector<double> phi = pole_potential(m.grid(), 3.5);
    CHECK_FALSE(germ_integral(3, phi, 1.0, m, opt).divergent);
    CHECK(germ_integral(2, phi, 1.0, m, opt).divergent);
    // tau nu = n: log-borderline at k = 0.
    CHECK(germ_integral(0, pole_potential(m.grid(), 1.0), 1.0, m, opt).divergent);
    CHECK_FALSE(germ_integral(0, pole_potential(m.grid(), 0.5), 1.0, m, opt).divergent);
}

TEST_CASE("germ integral decreases with the vanishing order", "[multiplier][property]") {
    const KahlerModel m(1, 2.0, default_grid());
    GermOptions opt;
    opt.upper = 0.0;  // e^{ks} <= 1 on the whole domain of integration
    for (double nu : {0.5, 2.0, 6.0}) {
        const std::vector<double> phi = pole_potential(m.grid(), nu);
        for (int k = 0; k < 5; ++k) {
            const GermIntegral a = germ_integral(k, phi, 0.6, m, opt);
            const GermIntegral b = germ_integral(k + 1, phi, 0.6, m, opt);
            for (std::size_t j = 0; j < a.log_values.size(); ++j) CHECK(b.log_values[j] <= a.log_values[j]);
        }
    }
}

TEST_CASE("stalk examples", "[multiplier]") {
    const KahlerModel m(1, 2.0, default_grid());
    PotentialSequence flat{m, {}};
    for (double tau : {0.2, 0.5, 0.9}) flat.entries.push_back({std::vector<double>(m.grid().size(), 0.0), tau, build_constant_rhs(m)});
    const StalkDescriptor z = stalk_from_sequence(flat);
    CHECK(z.k_min == 0);
    CHECK_FALSE(z.nontrivial);
    CHECK_FALSE(z.equals_maximal_ideal);

    const StalkDescriptor one = stalk_from_sequence(sequence(m, {{0.5, 3.0}}));
    CHECK(one.k_min == 1);
    CHECK(one.equals_maximal_ideal);
    const TrivialLemmaReport rep = trivial_lemma_report(one, 1.0);
    CHECK_FALSE(rep.maximal_ideal_excluded);

    const StalkDescriptor three = stalk_from_sequence(sequence(m, {{0.5, 7.0}}));
    CHECK(three.k_min == 3);
    CHECK(three.nontrivial);
    CHECK_FALSE(three.equals_maximal_ideal);
}
