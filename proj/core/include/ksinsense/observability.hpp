#pragma once

#include <string>
#include <utility>

#include "ksinsense/carleman.hpp"
#include "ksinsense/solvers.hpp"

namespace ksi {

/// Weighted-norm accumulations can both underflow (benign, the weight
/// vanishes at the time edges) and overflow (flagged, never silently
/// rescaled).
struct FunctionalValue {
    double value = 0.0;
    bool overflow = false;
};

/// The fourth-order Carleman functional: weighted squared norms of
/// q, q_x, q_xx, q_xxx, q_t and q_xxxx with powers s^7 xi^7 down to
/// s^-1 xi^-1 under e^{-2 s phi}. Fields are averaged onto the time
/// midpoints where the weights are sampled; time derivatives are the
/// centered difference across each time cell.
FunctionalValue eval_I_KS(const SpaceTimeField& q, const WeightSet& ws,
                          const Grid& grid, const TimeGrid& tg);

/// The second-order Carleman functional I_H(q; r) with the standard
/// (s xi)^{r-4}..(s xi)^r ladder. The instances used downstream are r = 3
/// and r = 9.
FunctionalValue eval_I_H(const SpaceTimeField& q, double r, const WeightSet& ws,
                         const Grid& grid, const TimeGrid& tg);

enum class AlphaRegime { Interior, Zero, One };

struct CarlemanFunctionalReport {
    std::string regime;
    std::vector<std::pair<std::string, double>> lhs_terms;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool overflow = false;
};

/// Solve the regime-appropriate adjoint and report LHS / RHS of the matching
/// Carleman inequality, with the observation integrals taken over omega0.
/// Ratios are reported, never asserted against a bound. Throws
/// DegenerateObservation when the RHS falls below 1e-300.
CarlemanFunctionalReport carleman_ratio(AlphaRegime regime,
                                        std::span<const double> zeta0,
                                        std::span<const double> theta0,
                                        const WeightSet& ws, const Grid& grid,
                                        const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const IndicatorMask& omega0);

struct ObservabilityEstimate {
    std::vector<double> mu;
    std::vector<double> c_obs;
    double dominant_value = 0.0;          ///< eigenvalue at the smallest mu
    std::vector<double> dominant_vector;  ///< matching (zeta0, theta0) stack
    int n_space = 0;
    int n_steps = 0;
    int basis_dim = 0;
};

/// Discrete observability constant as a regularized generalized Rayleigh
/// quotient: largest eigenvalue of A x = c (B + mu I) x where
///   A = quadrature of rho^-2 (|u|^2 + |w|^2) over Q_T,
///   B = quadrature of |u|^2 + |w|^2 over omega x (0,T),
/// assembled densely by running the adjoint on each basis vector. With
/// subspace_dim in (0, 2n) the forms are restricted to that many leading
/// sine modes. Intended for small resolutions (N <= 48).
ObservabilityEstimate estimate_observability(const IndicatorMask& omega,
                                             const WeightSet& ws,
                                             const Grid& grid,
                                             const TimeGrid& tg,
                                             const PhysicsParams& params,
                                             std::span<const double> mu_list,
                                             int subspace_dim = 0);

} // namespace ksi
