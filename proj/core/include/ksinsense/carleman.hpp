#pragma once

#include <vector>

#include "ksinsense/field.hpp"
#include "ksinsense/grid.hpp"

namespace ksi {

/// Auxiliary function with a single interior critical point x0, vanishing at
/// both walls, positive inside, and |nu'| bounded away from zero outside the
/// interval (a,b) containing x0. Realized as a Mobius-warped parabola
///   nu(x) = 4 m(x) (1 - m(x)),  m(x) = x / (x + c (1-x)),  c = x0/(1-x0),
/// which puts the critical point exactly at x0 and makes max nu = 1.
struct NuFunction {
    double x0 = 0.5;
    double mobius_c = 1.0;
    double c_lower = 0.0;       ///< min |nu'| over grid nodes outside (a,b)
    double norm_inf = 1.0;      ///< sup nu = nu(x0), exactly 1 by construction
    double omega0_a = 0.0;
    double omega0_b = 0.0;
    std::vector<double> values;  ///< samples at nodes 0..N
    std::vector<double> derivs;  ///< nu' at nodes 0..N

    double eval(double x) const;
    double eval_deriv(double x) const;
};

NuFunction build_nu(const Grid& grid, double a, double b);
NuFunction build_nu(const Grid& grid, const IndicatorMask& omega0);

/// Carleman exponents and parameters; requires k > m > 0, lambda > 1, s > 0.
struct CarlemanParams {
    double m = 2.0;
    double k = 3.0;
    double s = 1.0;
    double lambda = 2.0;

    void validate() const;
};

/// All weight families sampled at time-cell midpoints t_{j+1/2} (the
/// singular families are never evaluated at t in {0,T}) over every node
/// x_0..x_N including the walls. The frak families replace t(T-t) by
///   ell(t) = t(T-t) on [0,T/2],  T^2/4 on [T/2,T],
/// so only t=0 stays singular. rho(t) = exp(s * frakS_hat(t)) may overflow
/// to +inf for small t; log_rho is always finite.
struct WeightSet {
    CarlemanParams params;
    NuFunction nu;
    double T = 0.0;
    int n_tmid = 0;   ///< number of sampled midpoints (= M)
    int n_nodes = 0;  ///< number of spatial samples (= N+1)

    std::vector<double> phi, xi, frak_s, frak_z;  ///< [n_tmid * n_nodes]
    std::vector<double> phi_hat, xi_star;          ///< [n_tmid]
    std::vector<double> frak_s_hat, frak_z_star;   ///< [n_tmid]
    std::vector<double> log_rho, rho;              ///< [n_tmid]
    std::vector<double> t_mid;                     ///< [n_tmid]

    double at(const std::vector<double>& a, int t_idx, int node) const {
        return a[static_cast<std::size_t>(t_idx) * n_nodes + node];
    }

    double ell(double t) const;
    double phi_at(double t, double x) const;
    double xi_at(double t, double x) const;
    double frak_s_at(double t, double x) const;
    double frak_z_at(double t, double x) const;
    double phi_hat_at(double t) const { return phi_at(t, 0.0); }
    double xi_star_at(double t) const { return xi_at(t, 0.0); }
    double frak_s_hat_at(double t) const { return frak_s_at(t, 0.0); }
    double frak_z_star_at(double t) const { return frak_z_at(t, 0.0); }
    double log_rho_at(double t) const { return params.s * frak_s_hat_at(t); }
};

/// Sample every weight family on the space-time mesh.
WeightSet build_weights(const NuFunction& nu, const CarlemanParams& params,
                        const Grid& grid, const TimeGrid& tg);

/// Empirical constants of the standard weight estimates: grid-suprema of
///   |d_x(e^{-2 s phi} xi^b)| / (s lambda xi * e^{-2 s phi} xi^b),
///   |d_t(...)| / (s xi^{1+1/m} * ...),
/// and, for m > 1 only, |d_t(...)| / (T^{2m-2} s xi^2 * ...).
/// The derivative-to-function ratios are formed through the logarithm of the
/// weight product (d(g)/g = -2 s d(phi) + b d(log xi)), with phi and log xi
/// differenced centrally on the sampled mesh; this stays representable where
/// the product itself underflows near the time edges.
struct WeightEstimateReport {
    double ratio_x = 0.0;
    double ratio_t = 0.0;
    double ratio_t_m = 0.0;
    bool t_m_evaluated = false;
    int points_used_x = 0;
    int points_used_t = 0;
};
WeightEstimateReport audit_weight_estimates(const WeightSet& ws, double b,
                                            const Grid& grid, const TimeGrid& tg);

/// Sign certificate for -p s phi + (p-2) s phi_hat <= -delta s / (t(T-t))^m:
/// delta = min over nodes (and over x0) of
///   2 e^{(lambda/m) k |nu|} - p e^{lambda nu(x)} + p - 2.
struct GoodSignReport {
    double delta = 0.0;
    bool holds = false;
};
GoodSignReport audit_good_sign(const WeightSet& ws, int p);
GoodSignReport audit_good_sign(const NuFunction& nu, double m, double k,
                               double lambda, int p);

/// Smallest k on the geometric grid {m * 1.1^j, j >= 1} whose good-sign
/// margin reaches delta >= 0.1. Throws SearchFailed past k > 100 m.
double search_k(const NuFunction& nu, double m, double lambda, int p);

/// Quadrature of rho^2 |xi_i|^2 over the mesh, accumulated in log space so a
/// blown-up rho reports +inf instead of NaN. Sources are averaged onto the
/// time midpoints where rho is sampled.
struct SourceAdmissibility {
    double weighted_norm_1 = 0.0;
    double weighted_norm_2 = 0.0;
    double log10_norm_1 = 0.0;  ///< -inf when the source vanishes
    double log10_norm_2 = 0.0;
    bool admissible = false;
    double cap = 0.0;
};
SourceAdmissibility check_source_admissibility(const SpaceTimeField& xi1,
                                               const SpaceTimeField& xi2,
                                               const WeightSet& ws,
                                               const Grid& grid,
                                               const TimeGrid& tg,
                                               double cap = 1e300);

} // namespace ksi
