#pragma once

#include <vector>

#include "ksinsense/errors.hpp"

namespace ksi {

/// Uniform spatial mesh on [0,1]: nodes x_j = j*h, j = 0..N, h = 1/N.
/// Unknowns live on the N-1 interior nodes; boundary values are eliminated
/// (all boundary conditions of the model are homogeneous).
class Grid {
public:
    explicit Grid(int n_cells);

    int n_cells() const { return n_cells_; }
    int n_interior() const { return n_cells_ - 1; }
    double h() const { return 1.0 / n_cells_; }

    /// Coordinate of node j, j = 0..N (0 and N are the boundary).
    double x(int j) const { return j * h(); }
    /// Coordinate of interior unknown i, i = 0..n_interior()-1 (node i+1).
    double x_interior(int i) const { return (i + 1) * h(); }

private:
    int n_cells_;
};

/// Uniform time mesh on [0,T]: levels t_n = n*dt, n = 0..M, dt = T/M.
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps);

    double T() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    double dt() const { return horizon_ / n_steps_; }

    double t(int n) const { return n * dt(); }
    /// Cell midpoint t_{n+1/2}, n = 0..M-1. Weight families singular at
    /// t in {0,T} are always sampled here.
    double t_mid(int n) const { return (n + 0.5) * dt(); }

private:
    double horizon_;
    int n_steps_;
};

/// Per-interior-node weights in [0,1] realizing an indicator 1_(a,b).
///
/// sharp: pointwise sampling of the open-set indicator (1 strictly inside,
/// 0 elsewhere, including nodes landing exactly on a or b).
/// linear-ramp: one-cell linear transition at each endpoint.
class IndicatorMask {
public:
    enum class Smoothing { Sharp, LinearRamp };

    static IndicatorMask build(const Grid& grid, double a, double b,
                               Smoothing smoothing = Smoothing::Sharp);
    /// All interior nodes weighted 1 (observation over the whole domain).
    static IndicatorMask full(const Grid& grid);
    /// Pointwise minimum of two masks on the same grid.
    static IndicatorMask intersect(const IndicatorMask& m1, const IndicatorMask& m2);

    const std::vector<double>& weights() const { return w_; }
    double weight(int i) const { return w_[i]; }
    int size() const { return static_cast<int>(w_.size()); }

    double a() const { return a_; }
    double b() const { return b_; }

    bool empty() const;

private:
    IndicatorMask(std::vector<double> w, double a, double b)
        : w_(std::move(w)), a_(a), b_(b) {}

    std::vector<double> w_;
    double a_;
    double b_;
};

} // namespace ksi
