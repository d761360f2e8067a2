#pragma once

#include <span>
#include <vector>

#include "ksinsense/grid.hpp"

namespace ksi {

/// Scalar field sampled on the full space-time mesh: (M+1) time levels by
/// n interior nodes, stored row-major by time level.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(int n_levels, int n_nodes)
        : n_levels_(n_levels), n_nodes_(n_nodes),
          v_(static_cast<std::size_t>(n_levels) * n_nodes, 0.0) {}

    static SpaceTimeField zeros(const Grid& grid, const TimeGrid& tg) {
        return SpaceTimeField(tg.n_steps() + 1, grid.n_interior());
    }

    int n_levels() const { return n_levels_; }
    int n_nodes() const { return n_nodes_; }

    std::span<double> level(int n) {
        return {v_.data() + static_cast<std::size_t>(n) * n_nodes_,
                static_cast<std::size_t>(n_nodes_)};
    }
    std::span<const double> level(int n) const {
        return {v_.data() + static_cast<std::size_t>(n) * n_nodes_,
                static_cast<std::size_t>(n_nodes_)};
    }

    double& at(int n, int i) { return v_[static_cast<std::size_t>(n) * n_nodes_ + i]; }
    double at(int n, int i) const { return v_[static_cast<std::size_t>(n) * n_nodes_ + i]; }

    const std::vector<double>& data() const { return v_; }
    std::vector<double>& data() { return v_; }

private:
    int n_levels_ = 0;
    int n_nodes_ = 0;
    std::vector<double> v_;
};

/// Mass-weighted discrete L2 inner product on interior nodes: h * sum a_i b_i.
/// This is the trapezoid rule for functions vanishing on the boundary and is
/// the pairing every duality statement in the library is expressed in.
double inner_h(std::span<const double> a, std::span<const double> b, double h);

/// sqrt(inner_h(a, a, h)).
double norm_h(std::span<const double> a, double h);

/// Inner product with a pointwise mask weight: h * sum m_i a_i b_i.
double inner_h_masked(std::span<const double> a, std::span<const double> b,
                      std::span<const double> mask, double h);

/// C0(L2) norm of a space-time field: max over levels of norm_h.
double c0_l2_norm(const SpaceTimeField& f, double h);

/// L2(Q_T) norm: sqrt( dt * sum over levels (trapezoid in t) of |f|_h^2 ).
double l2_qt_norm(const SpaceTimeField& f, double h, double dt);

} // namespace ksi
