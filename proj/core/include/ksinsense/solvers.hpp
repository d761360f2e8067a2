#pragma once

#include <optional>
#include <span>

#include "ksinsense/field.hpp"
#include "ksinsense/stepper.hpp"

namespace ksi {

/// Time discretization of the forward solver. Implicit Euler is the default;
/// every backward solve is implicit Euler so that the one-step map is the
/// exact transpose of the forward one.
enum class TimeScheme { ImplicitEuler, CrankNicolson };

/// Factorized one-step operator shared by all four systems. The backward
/// directions solve with the transpose of the same factorization, which is
/// what makes the discrete duality identity exact.
class StepOperators {
public:
    static StepOperators build(const Grid& grid, const TimeGrid& tg,
                               const PhysicsParams& params);

    std::vector<double> step_forward(std::span<const double> rhs) const {
        return a_.solve(rhs);
    }
    std::vector<double> step_backward(std::span<const double> rhs) const {
        return a_.solve_transpose(rhs);
    }

private:
    explicit StepOperators(BandedMatrix a) : a_(std::move(a)) {}
    BandedMatrix a_;
};

struct ForwardSolution {
    SpaceTimeField y;
    SpaceTimeField z;
};

struct BackwardPair {
    SpaceTimeField p4;  ///< fourth-order component (p or u)
    SpaceTimeField q2;  ///< second-order component (q or w)
};

struct CascadeSolution {
    SpaceTimeField y, z, p, q;
};

struct AdjointSolution {
    SpaceTimeField u, w, zeta, theta;
};

/// Trapezoid-consistent weight carried by the observation coupling at time
/// level j (j = 1..M). The final level enters with weight 1/2 so that the
/// backward solves are the exact adjoints of the trapezoid quadrature used
/// by the sentinel functional.
inline double obs_time_weight(int level, int n_steps) {
    return level == n_steps ? 0.5 : 1.0;
}

/// Implicit Euler for the controlled forward pair:
///   (I + dt L) X^{n+1} = X^n + dt (sources at level n+1),
/// with the controls injected through the omega mask. Null pointers stand
/// for absent inputs; empty initial spans mean zero data.
ForwardSolution solve_forward(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* f1, const SpaceTimeField* f2,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const IndicatorMask* omega,
                              TimeScheme scheme = TimeScheme::ImplicitEuler);

/// Backward sweep from zero final data driven by the observed forward pair:
///   (I + dt L)^T R^n = R^{n+1} + dt w_{n+1} S X^{n+1},
/// where S = diag(alpha 1_O, (1-alpha) 1_O) and w is obs_time_weight. Both
/// the cascade and the adjoint backward halves are this one operation.
BackwardPair backward_from_observation(const StepOperators& ops,
                                       const Grid& grid, const TimeGrid& tg,
                                       const PhysicsParams& params,
                                       const SpaceTimeField& obs4,
                                       const SpaceTimeField& obs2,
                                       const IndicatorMask& obs_mask);

/// Forward solve followed by the backward sweep sourced by (y,z) on O.
CascadeSolution solve_cascade(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const SpaceTimeField* xi1, const SpaceTimeField* xi2,
                              const IndicatorMask* omega,
                              const IndicatorMask& obs_mask);

/// Homogeneous forward pair from (zeta0, theta0) followed by the backward
/// sweep sourced by (zeta, theta) on O.
AdjointSolution solve_adjoint(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> zeta0,
                              std::span<const double> theta0,
                              const IndicatorMask& obs_mask);

/// Variants reusing a prebuilt factorization (the HUM hot path).
ForwardSolution solve_forward(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* f1, const SpaceTimeField* f2,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const IndicatorMask* omega);
AdjointSolution solve_adjoint(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> zeta0,
                              std::span<const double> theta0,
                              const IndicatorMask& obs_mask);
CascadeSolution solve_cascade(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const SpaceTimeField* xi1, const SpaceTimeField* xi2,
                              const IndicatorMask* omega,
                              const IndicatorMask& obs_mask);

/// The canonical source/trace pairing of the discrete duality identity:
///   dt * sum_{n=0}^{M-1} < masked source at level n+1 , trace at level n >_h.
/// Passing a null mask leaves the source unmasked (the xi terms).
double duality_pairing(const Grid& grid, const TimeGrid& tg,
                       const SpaceTimeField& source, const IndicatorMask* mask,
                       const SpaceTimeField& trace);

} // namespace ksi
