#pragma once

#include <cstddef>

namespace cmalab {

// Uniform grid on the log-radial coordinate s = log|z|^2.
class SGrid {
public:
    SGrid(double s_min, double s_max, std::size_t points);

    double s_min() const noexcept { return s_min_; }
    double s_max() const noexcept { return s_max_; }
    std::size_t size() const noexcept { return points_; }
    double h() const noexcept { return h_; }
    double node(std::size_t i) const noexcept;

    // Index of the node nearest to s, clamped to the grid.
    std::size_t nearest(double s) const noexcept;

    bool operator==(const SGrid& other) const noexcept = default;

private:
    double s_min_;
    double s_max_;
    std::size_t points_;
    double h_;
};

SGrid default_grid();

}  // namespace cmalab
