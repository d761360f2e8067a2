#pragma once

#include "ksinsense/solvers.hpp"

namespace ksi {

/// Penalized-HUM knobs: conjugate gradient on (Gramian + epsilon I).
struct HumConfig {
    double epsilon = 1e-6;
    double cg_tol = 1e-8;
    int cg_max_iter = 500;

    void validate() const {
        if (!(epsilon > 0.0)) throw Error("HumConfig: epsilon must be > 0");
        if (!(cg_tol > 0.0 && cg_tol < 1.0))
            throw Error("HumConfig: cg_tol must lie in (0,1)");
        if (cg_max_iter < 1) throw Error("HumConfig: cg_max_iter must be >= 1");
    }
};

/// Output of the control construction. Controls vanish exactly outside the
/// omega mask; p0/q0 are the residual cascade data at t = 0.
struct HumResult {
    std::vector<double> zeta0_star;
    std::vector<double> theta0_star;
    SpaceTimeField h1;
    SpaceTimeField h2;
    std::vector<double> p0;
    std::vector<double> q0;
    int cg_iters = 0;
    double cg_rel_residual = 0.0;
    bool converged = false;       ///< false flags CgStalled; best iterate kept
    double residual_norm = 0.0;   ///< |(p0, q0)|_h
    double uncontrolled_norm = 0.0;
    double duality_gap = 0.0;     ///< |(p0,q0) + eps (zeta0*,theta0*)| relative
    double epsilon = 0.0;
};

/// The Gramian applied to adjoint data: solve the adjoint, feed the masked
/// (u,w) traces back as controls of the cascade with zero sources and zero
/// initial data, return (p(0), q(0)). Symmetric and positive semidefinite in
/// the mass-weighted pairing by the exact-transpose construction.
struct GramianApplication {
    std::vector<double> p0;
    std::vector<double> q0;
};
GramianApplication gramian_apply(const StepOperators& ops, const Grid& grid,
                                 const TimeGrid& tg, const PhysicsParams& params,
                                 const IndicatorMask& omega,
                                 const IndicatorMask& obs_mask,
                                 std::span<const double> zeta0,
                                 std::span<const double> theta0);
GramianApplication gramian_apply(const Grid& grid, const TimeGrid& tg,
                                 const PhysicsParams& params,
                                 const IndicatorMask& omega,
                                 const IndicatorMask& obs_mask,
                                 std::span<const double> zeta0,
                                 std::span<const double> theta0);

/// Uncontrolled cascade residual (p(0), q(0)) for given sources, zero data.
GramianApplication free_solution_offset(const StepOperators& ops,
                                        const Grid& grid, const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const SpaceTimeField* xi1,
                                        const SpaceTimeField* xi2,
                                        const IndicatorMask& obs_mask);
GramianApplication free_solution_offset(const Grid& grid, const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const SpaceTimeField* xi1,
                                        const SpaceTimeField* xi2,
                                        const IndicatorMask& obs_mask);

/// Build the adjoint-trace control fields for given adjoint data: slice j of
/// the control (j = 1..M) is the masked trace at level j-1, matching the
/// staggered source/trace pairing of the duality identity.
struct ControlFields {
    SpaceTimeField h1;
    SpaceTimeField h2;
};
ControlFields controls_from_adjoint(const Grid& grid, const TimeGrid& tg,
                                    const AdjointSolution& adj,
                                    const IndicatorMask& omega);

/// Penalized HUM: conjugate gradient on
///   (Gramian + epsilon I) (zeta0, theta0) = -(p_hat(0), q_hat(0))
/// in the mass-weighted inner product, then one final controlled cascade
/// with the true sources to report the achieved residual.
HumResult solve_hum(const Grid& grid, const TimeGrid& tg,
                    const PhysicsParams& params, const IndicatorMask& omega,
                    const IndicatorMask& obs_mask, const SpaceTimeField* xi1,
                    const SpaceTimeField* xi2, const HumConfig& cfg);

} // namespace ksi
