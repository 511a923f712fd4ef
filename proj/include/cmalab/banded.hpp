#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cmalab {

// Square banded matrix with kl sub- and ku super-diagonals, stored in the
// LAPACK general-band layout with room for the LU fill-in.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t size() const noexcept { return n_; }
    std::size_t lower() const noexcept { return kl_; }
    std::size_t upper() const noexcept { return ku_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept;
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    void apply(std::span<const double> x, std::span<double> y) const;

    // Solves A x = b with row equilibration, partial pivoting and one step of
    // iterative refinement. Returns false when the factorization is singular.
    bool solve(std::span<const double> b, std::span<double> x) const;

private:
    std::size_t n_, kl_, ku_, ld_;
    std::vector<double> ab_;  // column-major, ld_ rows
};

}  // namespace cmalab
