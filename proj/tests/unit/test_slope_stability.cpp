#include <catch_amalgamated.hpp>

#include "cmalab/errors.hpp"
#include "cmalab/slope_stability.hpp"

using namespace cmalab;

TEST_CASE("tangent bundle restricted to a line", "[slope]") {
    for (int n = 1; n <= 64; ++n) {
        const BundleSpec t = tangent_restricted_to_line(n);
        CHECK(t.total_rank() == n);
        CHECK(t.total_degree() == Rational(n + 1));
        CHECK(normalized_slope(t) == Rational(n + 1, n));
    }
    CHECK(normalized_slope(line_tangent()) == Rational(2));
}

TEST_CASE("the line tangent destabilizes for n >= 2", "[slope]") {
    for (int n = 2; n <= 64; ++n) CHECK(destabilizes(line_tangent(), tangent_restricted_to_line(n)));
    CHECK_THROWS_AS(destabilizes(line_tangent(), tangent_restricted_to_line(1)), PreconditionError);
}

TEST_CASE("equal slopes do not destabilize", "[slope]") {
    const BundleSpec w({{Rational(1), 1}});
    const BundleSpec v({{Rational(1), 1}, {Rational(1), 1}});
    CHECK_FALSE(destabilizes(w, v));
}

// Twisting both bundles by the same line bundle shifts both slopes equally.
TEST_CASE("destabilization is invariant under a common twist", "[slope][property]") {
    for (int n = 2; n <= 12; ++n) {
        for (int twist = -5; twist <= 5; ++twist) {
            std::vector<Summand> vs{{Rational(2 + twist), 1}};
            for (int i = 1; i < n; ++i) vs.push_back({Rational(1 + twist), 1});
            const BundleSpec v(vs);
            const BundleSpec w({{Rational(2 + twist), 1}});
            CHECK(destabilizes(w, v) == destabilizes(line_tangent(), tangent_restricted_to_line(n)));
            CHECK(normalized_slope(v) - normalized_slope(tangent_restricted_to_line(n)) == Rational(twist));
        }
    }
}

TEST_CASE("exact rational slopes", "[slope]") {
    const BundleSpec v({{Rational(1, 3), 2}, {Rational(2, 3), 1}});
    CHECK(v.total_degree() == Rational(1));
    CHECK(normalized_slope(v) == Rational(1, 3));
    CHECK_THROWS_AS(BundleSpec({{Rational(1), 0}}), ConfigurationError);
    CHECK_THROWS_AS(normalized_slope(BundleSpec{}), PreconditionError);
    CHECK_THROWS_AS(tangent_restricted_to_line(0), ConfigurationError);
}

TEST_CASE("trivial bundles have slope zero", "[slope]") {
    for (std::int64_t k = 1; k <= 5; ++k) CHECK(normalized_slope(BundleSpec({{Rational(0), k}})) == Rational(0));
}

TEST_CASE("scaling degrees preserves every verdict", "[slope][property]") {
    for (int n = 2; n <= 16; ++n) {
        for (int scale = 1; scale <= 7; ++scale) {
            const BundleSpec base = tangent_restricted_to_line(n);
            std::vector<Summand> vs;
            for (const Summand& s : base.summands()) vs.push_back({Rational(s.degree * scale), s.rank});
            const BundleSpec v(vs);
            const BundleSpec w({{Rational(2 * scale), 1}});
            CHECK(destabilizes(w, v));
            CHECK(normalized_slope(v) == Rational(Rational(scale) * Rational(n + 1, n)));
        }
    }
}
