#include "cmalab/slope_stability.hpp"

#include <string>

#include "cmalab/errors.hpp"

namespace cmalab {

BundleSpec::BundleSpec(std::vector<Summand> summands) : summands_(std::move(summands)) {
    for (const Summand& s : summands_) {
        if (s.rank <= 0) throw ConfigurationError("bundle: summand ranks must be positive");
    }
}

Rational BundleSpec::total_degree() const {
    Rational total = 0;
    for (const Summand& s : summands_) total += s.degree;
    return total;
}

std::int64_t BundleSpec::total_rank() const noexcept {
    std::int64_t r = 0;
    for (const Summand& s : summands_) r += s.rank;
    return r;
}

Rational normalized_slope(const BundleSpec& b) {
    const std::int64_t r = b.total_rank();
    if (r <= 0) throw PreconditionError("normalized slope of a rank-zero bundle");
    return b.total_degree() / Rational(r);
}

bool destabilizes(const BundleSpec& w, const BundleSpec& v) {
    if (w.total_rank() >= v.total_rank()) {
        throw PreconditionError("destabilizes: rank(W) = " + std::to_string(w.total_rank()) +
                                " is not below rank(V) = " + std::to_string(v.total_rank()));
    }
    return normalized_slope(w) > normalized_slope(v);
}

BundleSpec tangent_restricted_to_line(int n) {
    if (n < 1) throw ConfigurationError("tangent bundle: n must be at least 1");
    std::vector<Summand> s{{Rational(2), 1}};
    for (int i = 1; i < n; ++i) s.push_back({Rational(1), 1});
    return BundleSpec(std::move(s));
}

BundleSpec line_tangent() { return BundleSpec({{Rational(2), 1}}); }

}  // namespace cmalab
