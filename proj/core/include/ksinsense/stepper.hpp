#pragma once

#include "ksinsense/banded.hpp"
#include "ksinsense/grid.hpp"
#include "ksinsense/operators.hpp"

namespace ksi {

/// Physical coefficients of the coupled fourth/second-order system.
struct PhysicsParams {
    double gamma = 1.0;  ///< anti-diffusion coefficient, > 0
    double beta = 0.0;   ///< transport coefficient, any real
    double alpha = 0.5;  ///< sentinel weight in [0,1]

    void validate() const {
        if (!(gamma > 0.0)) throw Error("PhysicsParams: gamma must be > 0");
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw Error("PhysicsParams: alpha must lie in [0,1]");
    }
};

/// The four one-step operators of the model. Two distinct matrices arise:
/// the two forward systems share I + dt*L and the two backward systems its
/// exact transpose, where
///   L = [ D4 + gamma*D2   -D1          ]
///       [ -D1             -D2 + beta*D1 ]
/// acting on node-wise interleaved pairs (a_1, b_1, a_2, b_2, ...).
enum class StepDirection {
    Forward,          ///< controlled state pair
    BackwardCascade,  ///< backward pair driven by observed forward states
    ForwardAdjoint,   ///< homogeneous adjoint pair, same matrix as Forward
    BackwardAdjoint   ///< backward adjoint pair, same matrix as BackwardCascade
};

/// Interleaved index of the fourth-order component at interior node i.
inline int idx_a(int i) { return 2 * i; }
/// Interleaved index of the second-order component at interior node i.
inline int idx_b(int i) { return 2 * i + 1; }

/// One-step implicit Euler matrix I + dt*L (or its transpose for the
/// backward directions), order 2*(N-1), bandwidth 4 per side after
/// interleaving. All couplings are inside the matrix.
BandedMatrix step_operator(const Grid& grid, const TimeGrid& tg,
                           const PhysicsParams& params, StepDirection direction);

/// Crank-Nicolson companion matrices: lhs = I + (dt/2) L, rhs = I - (dt/2) L.
struct CrankNicolsonPair {
    BandedMatrix lhs;
    BandedMatrix rhs;
};
CrankNicolsonPair crank_nicolson_operators(const Grid& grid, const TimeGrid& tg,
                                           const PhysicsParams& params);

} // namespace ksi
