#include "ksinsense/sentinel.hpp"

#include <cmath>

namespace ksi {

double evaluate_sentinel(const SpaceTimeField& y, const SpaceTimeField& z,
                         const IndicatorMask& obs_mask, double alpha,
                         const Grid& grid, const TimeGrid& tg) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    double acc = 0.0;
    for (int level = 0; level <= m; ++level) {
        const double w = (level == 0 || level == m) ? 0.5 : 1.0;
        auto ys = y.level(level);
        auto zs = z.level(level);
        double slice = 0.0;
        for (int i = 0; i < n; ++i) {
            slice += obs_mask.weight(i) *
                     (0.5 * alpha * ys[i] * ys[i] +
                      0.5 * (1.0 - alpha) * zs[i] * zs[i]);
        }
        acc += w * slice;
    }
    return acc * grid.h() * tg.dt();
}

std::vector<double> draw_unit_perturbation(const Grid& grid,
                                           std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(grid.n_interior());
    for (double& x : v) x = normal(rng);
    const double nrm = norm_h(v, grid.h());
    if (nrm == 0.0) {
        v[0] = 1.0 / std::sqrt(grid.h());
        return v;
    }
    for (double& x : v) x /= nrm;
    return v;
}

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
                                 std::span<const double> tau_list) {
    const int n = grid.n_interior();
    StepOperators ops = StepOperators::build(grid, tg, params);

    auto sentinel_at = [&](double tau) {
        std::vector<double> y0(n, 0.0), z0(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (!y0_base.empty()) y0[i] = y0_base[i];
            if (!z0_base.empty()) z0[i] = z0_base[i];
            y0[i] += tau * ybar0[i];
            z0[i] += tau * zbar0[i];
        }
        ForwardSolution sol = solve_forward(ops, grid, tg, params, y0, z0,
                                            xi1, xi2, h1, h2, &omega);
        return evaluate_sentinel(sol.y, sol.z, obs_mask, params.alpha, grid, tg);
    };

    FdDerivativeReport rep;
    rep.fd.reserve(tau_list.size());
    for (double tau : tau_list) {
        const double jp = sentinel_at(tau);
        const double jm = sentinel_at(-tau);
        rep.fd.push_back((jp - jm) / (2.0 * tau));
    }
    if (tau_list.size() >= 2) {
        // Two-point extrapolation of fd(tau) = D + C tau^2.
        const double t1 = tau_list[0];
        const double t2 = tau_list[1];
        rep.richardson =
            (t1 * t1 * rep.fd[1] - t2 * t2 * rep.fd[0]) / (t1 * t1 - t2 * t2);
    } else {
        rep.richardson = rep.fd[0];
    }
    return rep;
}

double derivative_analytic(std::span<const double> p0, std::span<const double> q0,
                           std::span<const double> ybar0,
                           std::span<const double> zbar0, const Grid& grid) {
    return inner_h(p0, ybar0, grid.h()) + inner_h(q0, zbar0, grid.h());
}

InsensitivityReport verify_insensitivity(const Grid& grid, const TimeGrid& tg,
                                         const PhysicsParams& params,
                                         const IndicatorMask& omega,
                                         const IndicatorMask& obs_mask,
                                         const SpaceTimeField* xi1,
                                         const SpaceTimeField* xi2,
                                         const HumResult& hum,
                                         const SentinelConfig& cfg) {
    cfg.validate();
    InsensitivityReport rep;
    rep.alpha = params.alpha;
    rep.epsilon = hum.epsilon;
    rep.residual_norm = hum.residual_norm;
    rep.cauchy_schwarz_bound = 2.0 * hum.residual_norm;
    rep.rng_seed = cfg.rng_seed;

    std::mt19937_64 rng(cfg.rng_seed);
    for (int p = 0; p < cfg.n_perturbations; ++p) {
        const std::vector<double> ybar0 = draw_unit_perturbation(grid, rng);
        const std::vector<double> zbar0 = draw_unit_perturbation(grid, rng);
        FdDerivativeReport fd = derivative_fd(grid, tg, params, &hum.h1, &hum.h2,
                                              xi1, xi2, omega, obs_mask, {}, {},
                                              ybar0, zbar0, cfg.tau_list);
        PerturbationDerivative d;
        d.fd = fd.richardson;
        d.analytic = derivative_analytic(hum.p0, hum.q0, ybar0, zbar0, grid);
        rep.per_perturbation.push_back(d);
        rep.max_abs_derivative =
            std::max(rep.max_abs_derivative, std::abs(d.analytic));
    }
    return rep;
}

} // namespace ksi
