#include "ksinsense/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ksi {

Grid::Grid(int n_cells) : n_cells_(n_cells) {
    if (n_cells_ < 9) {
        throw Error("Grid: need at least 8 interior nodes (N >= 9), got N = " +
                    std::to_string(n_cells_));
    }
}

TimeGrid::TimeGrid(double horizon, int n_steps)
    : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon_ > 0.0)) {
        throw Error("TimeGrid: horizon T must be positive");
    }
    if (n_steps_ < 4) {
        throw Error("TimeGrid: need at least 4 time steps, got M = " +
                    std::to_string(n_steps_));
    }
}

IndicatorMask IndicatorMask::build(const Grid& grid, double a, double b,
                                   Smoothing smoothing) {
    if (!(0.0 < a && a < b && b < 1.0)) {
        throw BadInterval("IndicatorMask: require 0 < a < b < 1, got (" +
                          std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    const int n = grid.n_interior();
    const double h = grid.h();
    std::vector<double> w(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x_interior(i);
        if (smoothing == Smoothing::Sharp) {
            w[i] = (x > a && x < b) ? 1.0 : 0.0;
        } else {
            // One-cell linear transition: 0 at the endpoints, 1 one cell in.
            const double d = std::min(x - a, b - x);
            w[i] = std::clamp(d / h, 0.0, 1.0);
        }
    }
    return IndicatorMask(std::move(w), a, b);
}

IndicatorMask IndicatorMask::full(const Grid& grid) {
    std::vector<double> w(grid.n_interior(), 1.0);
    return IndicatorMask(std::move(w), 0.0, 1.0);
}

IndicatorMask IndicatorMask::intersect(const IndicatorMask& m1,
                                       const IndicatorMask& m2) {
    if (m1.size() != m2.size()) {
        throw Error("IndicatorMask::intersect: size mismatch");
    }
    std::vector<double> w(m1.w_.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::min(m1.w_[i], m2.w_[i]);
    }
    return IndicatorMask(std::move(w), std::max(m1.a_, m2.a_),
                         std::min(m1.b_, m2.b_));
}

bool IndicatorMask::empty() const {
    for (double v : w_) {
        if (v > 0.0) return false;
    }
    return true;
}

} // namespace ksi
