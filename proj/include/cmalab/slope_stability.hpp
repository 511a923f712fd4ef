#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cmalab {

using Rational = boost::multiprecision::cpp_rational;

struct Summand {
    Rational degree;
    std::int64_t rank;
};

class BundleSpec {
public:
    BundleSpec() = default;
    explicit BundleSpec(std::vector<Summand> summands);

    const std::vector<Summand>& summands() const noexcept { return summands_; }
    Rational total_degree() const;
    std::int64_t total_rank() const noexcept;

private:
    std::vector<Summand> summands_;
};

Rational normalized_slope(const BundleSpec& b);

// Strict slope comparison; rank(W) < rank(V) is required.
bool destabilizes(const BundleSpec& w, const BundleSpec& v);

// T_{P^n} restricted to a line: O(2) + (n-1) O(1).
BundleSpec tangent_restricted_to_line(int n);
// T_C of the line: O(2).
BundleSpec line_tangent();

}  // namespace cmalab
