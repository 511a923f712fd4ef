#include "cmalab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmalab/errors.hpp"

namespace cmalab {

SGrid::SGrid(double s_min, double s_max, std::size_t points)
    : s_min_(s_min), s_max_(s_max), points_(points), h_(0.0) {
    if (!std::isfinite(s_min) || !std::isfinite(s_max) || !(s_min < s_max)) {
        throw ConfigurationError("grid: need finite s_min < s_max, got [" + std::to_string(s_min) + ", " +
                                 std::to_string(s_max) + "]");
    }
    if (points < 3) {
        throw ConfigurationError("grid: need at least 3 points, got " + std::to_string(points));
    }
    h_ = (s_max - s_min) / static_cast<double>(points - 1);
}

double SGrid::node(std::size_t i) const noexcept {
    if (i + 1 == points_) return s_max_;
    return s_min_ + static_cast<double>(i) * h_;
}

std::size_t SGrid::nearest(double s) const noexcept {
    const double x = std::round((s - s_min_) / h_);
    if (!(x > 0.0)) return 0;
    return std::min(points_ - 1, static_cast<std::size_t>(x));
}

SGrid default_grid() { return SGrid(-40.0, 40.0, 4001); }

}  // namespace cmalab
