#pragma once

#include <cstdint>
#include <random>

#include "ksinsense/hum.hpp"

namespace ksi {

/// Knobs of the insensitivity verification loop.
struct SentinelConfig {
    std::vector<double> tau_list{1e-2, 5e-3};
    int n_perturbations = 10;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (tau_list.empty()) throw Error("SentinelConfig: tau_list empty");
        for (double tau : tau_list) {
            if (!(tau != 0.0) || std::abs(tau) > 0.1)
                throw Error("SentinelConfig: tau values must be nonzero with "
                            "|tau| <= 0.1");
        }
        if (n_perturbations < 1)
            throw Error("SentinelConfig: n_perturbations must be >= 1");
    }
};

/// Sentinel functional: trapezoid quadrature over O x (0,T) of
/// (alpha/2)|y|^2 + ((1-alpha)/2)|z|^2.
double evaluate_sentinel(const SpaceTimeField& y, const SpaceTimeField& z,
                         const IndicatorMask& obs_mask, double alpha,
                         const Grid& grid, const TimeGrid& tg);

/// White noise on the interior nodes, normalized to unit mass-weighted norm.
std::vector<double> draw_unit_perturbation(const Grid& grid,
                                           std::mt19937_64& rng);

struct FdDerivativeReport {
    std::vector<double> fd;   ///< central difference per tau in tau_list
    double richardson = 0.0;  ///< two-point extrapolation (fd[0] if single tau)
};

/// Central finite differences of tau -> J(solution with data
/// (y0 + tau ybar0, z0 + tau zbar0)), controls and sources held fixed.
FdDerivativeReport derivative_fd(const Grid& grid, const TimeGrid& tg,
                                 const PhysicsParams& params,
                                 const SpaceTimeField* h1, const SpaceTimeField* h2,
                                 const SpaceTimeField* xi1, const SpaceTimeField* xi2,
                                 const IndicatorMask& omega,
                                 const IndicatorMask& obs_mask,
                                 std::span<const double> y0_base,
                                 std::span<const double> z0_base,
                                 std::span<const double> ybar0,
                                 std::span<const double> zbar0,
                                 std::span<const double> tau_list);

/// The Gateaux derivative of the sentinel read off the cascade residual:
/// < p(0), ybar0 >_h + < q(0), zbar0 >_h.
double derivative_analytic(std::span<const double> p0, std::span<const double> q0,
                           std::span<const double> ybar0,
                           std::span<const double> zbar0, const Grid& grid);

struct PerturbationDerivative {
    double fd = 0.0;
    double analytic = 0.0;
};

struct InsensitivityReport {
    double alpha = 0.0;
    double epsilon = 0.0;
    double residual_norm = 0.0;
    std::vector<PerturbationDerivative> per_perturbation;
    double max_abs_derivative = 0.0;      ///< over analytic derivatives
    double cauchy_schwarz_bound = 0.0;    ///< 2 |(p0,q0)|_h
    std::uint64_t rng_seed = 0;
};

/// Run derivative_fd and derivative_analytic over random unit perturbations
/// against a converged HUM result. Report-only; every derivative obeys
/// |derivative| <= 2 |(p0,q0)|_h by Cauchy-Schwarz.
InsensitivityReport verify_insensitivity(const Grid& grid, const TimeGrid& tg,
                                         const PhysicsParams& params,
                                         const IndicatorMask& omega,
                                         const IndicatorMask& obs_mask,
                                         const SpaceTimeField* xi1,
                                         const SpaceTimeField* xi2,
                                         const HumResult& hum,
                                         const SentinelConfig& cfg);

} // namespace ksi
