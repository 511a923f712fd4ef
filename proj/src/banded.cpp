#include "cmalab/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmalab/errors.hpp"

namespace cmalab {
namespace {

// Reciprocal condition numbers below this are treated as a singular linearization.
constexpr double kSingularRcond = 1e-14;

}  // namespace

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(ld_ * n, 0.0) {
    if (n == 0) throw ConfigurationError("banded matrix: empty system");
}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const noexcept {
    return i < n_ && j < n_ && i + ku_ >= j && j + kl_ >= i;
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) throw std::out_of_range("banded matrix: entry outside the band");
    return ab_[(kl_ + ku_ + i - j) + j * ld_];
}

double BandedMatrix::at(std::size_t i, std::size_t j) const {
    if (!in_band(i, j)) return 0.0;
    return ab_[(kl_ + ku_ + i - j) + j * ld_];
}

void BandedMatrix::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i > kl_ ? i - kl_ : 0;
        const std::size_t hi = std::min(n_ - 1, i + ku_);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += ab_[(kl_ + ku_ + i - j) + j * ld_] * x[j];
        y[i] = acc;
    }
}

bool BandedMatrix::solve(std::span<const double> b, std::span<double> x) const {
    std::vector<double> scale(n_, 1.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i > kl_ ? i - kl_ : 0;
        const std::size_t hi = std::min(n_ - 1, i + ku_);
        double m = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) m = std::max(m, std::abs(at(i, j)));
        if (!(m > 0.0) || !std::isfinite(m)) return false;
        scale[i] = 1.0 / m;
    }
    std::vector<double> lu(ab_);
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t lo = j > ku_ ? j - ku_ : 0;
        const std::size_t hi = std::min(n_ - 1, j + kl_);
        for (std::size_t i = lo; i <= hi; ++i) lu[(kl_ + ku_ + i - j) + j * ld_] *= scale[i];
    }
    std::vector<lapack_int> piv(n_);
    const auto n = static_cast<lapack_int>(n_);
    const auto kl = static_cast<lapack_int>(kl_);
    const auto ku = static_cast<lapack_int>(ku_);
    const auto ld = static_cast<lapack_int>(ld_);
    double anorm = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        double col = 0.0;
        for (std::size_t r = kl_; r < ld_; ++r) col += std::abs(lu[r + j * ld_]);
        anorm = std::max(anorm, col);
    }
    if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, lu.data(), ld, piv.data()) != 0) return false;
    double rcond = 0.0;
    if (LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, lu.data(), ld, piv.data(), anorm, &rcond) != 0 ||
        !(rcond > kSingularRcond)) {
        return false;
    }

    std::vector<double> rhs(n_);
    for (std::size_t i = 0; i < n_; ++i) rhs[i] = b[i] * scale[i];
    if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, lu.data(), ld, piv.data(), rhs.data(), n) != 0) {
        return false;
    }
    std::copy(rhs.begin(), rhs.end(), x.begin());

    std::vector<double> ax(n_);
    apply(x, ax);
    for (std::size_t i = 0; i < n_; ++i) rhs[i] = (b[i] - ax[i]) * scale[i];
    if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, lu.data(), ld, piv.data(), rhs.data(), n) != 0) {
        return false;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        x[i] += rhs[i];
        if (!std::isfinite(x[i])) return false;
    }
    return true;
}

}  // namespace cmalab
