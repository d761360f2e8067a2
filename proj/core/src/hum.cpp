#include "ksinsense/hum.hpp"

#include <cmath>

namespace ksi {

namespace {

std::vector<double> extract_level0(const SpaceTimeField& f) {
    auto s = f.level(0);
    return std::vector<double>(s.begin(), s.end());
}

/// Raw (unmasked) trace fields whose slice j is the adjoint trace at level
/// j-1; the omega mask is applied once, inside the forward solve.
ControlFields trace_fields(const Grid& grid, const TimeGrid& tg,
                           const AdjointSolution& adj) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    ControlFields out{SpaceTimeField::zeros(grid, tg),
                      SpaceTimeField::zeros(grid, tg)};
    for (int j = 1; j <= m; ++j) {
        auto u = adj.u.level(j - 1);
        auto w = adj.w.level(j - 1);
        for (int i = 0; i < n; ++i) {
            out.h1.at(j, i) = u[i];
            out.h2.at(j, i) = w[i];
        }
    }
    return out;
}

} // namespace

GramianApplication gramian_apply(const StepOperators& ops, const Grid& grid,
                                 const TimeGrid& tg, const PhysicsParams& params,
                                 const IndicatorMask& omega,
                                 const IndicatorMask& obs_mask,
                                 std::span<const double> zeta0,
                                 std::span<const double> theta0) {
    AdjointSolution adj =
        solve_adjoint(ops, grid, tg, params, zeta0, theta0, obs_mask);
    ControlFields traces = trace_fields(grid, tg, adj);
    CascadeSolution cas =
        solve_cascade(ops, grid, tg, params, {}, {}, &traces.h1, &traces.h2,
                      nullptr, nullptr, &omega, obs_mask);
    return GramianApplication{extract_level0(cas.p), extract_level0(cas.q)};
}

GramianApplication gramian_apply(const Grid& grid, const TimeGrid& tg,
                                 const PhysicsParams& params,
                                 const IndicatorMask& omega,
                                 const IndicatorMask& obs_mask,
                                 std::span<const double> zeta0,
                                 std::span<const double> theta0) {
    StepOperators ops = StepOperators::build(grid, tg, params);
    return gramian_apply(ops, grid, tg, params, omega, obs_mask, zeta0, theta0);
}

GramianApplication free_solution_offset(const StepOperators& ops,
                                        const Grid& grid, const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const SpaceTimeField* xi1,
                                        const SpaceTimeField* xi2,
                                        const IndicatorMask& obs_mask) {
    CascadeSolution cas = solve_cascade(ops, grid, tg, params, {}, {}, nullptr,
                                        nullptr, xi1, xi2, nullptr, obs_mask);
    return GramianApplication{extract_level0(cas.p), extract_level0(cas.q)};
}

GramianApplication free_solution_offset(const Grid& grid, const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const SpaceTimeField* xi1,
                                        const SpaceTimeField* xi2,
                                        const IndicatorMask& obs_mask) {
    StepOperators ops = StepOperators::build(grid, tg, params);
    return free_solution_offset(ops, grid, tg, params, xi1, xi2, obs_mask);
}

ControlFields controls_from_adjoint(const Grid& grid, const TimeGrid& tg,
                                    const AdjointSolution& adj,
                                    const IndicatorMask& omega) {
    ControlFields out = trace_fields(grid, tg, adj);
    const int n = grid.n_interior();
    for (int j = 0; j <= tg.n_steps(); ++j) {
        for (int i = 0; i < n; ++i) {
            out.h1.at(j, i) *= omega.weight(i);
            out.h2.at(j, i) *= omega.weight(i);
        }
    }
    return out;
}

HumResult solve_hum(const Grid& grid, const TimeGrid& tg,
                    const PhysicsParams& params, const IndicatorMask& omega,
                    const IndicatorMask& obs_mask, const SpaceTimeField* xi1,
                    const SpaceTimeField* xi2, const HumConfig& cfg) {
    cfg.validate();
    const int n = grid.n_interior();
    const double h = grid.h();
    StepOperators ops = StepOperators::build(grid, tg, params);

    GramianApplication offset =
        free_solution_offset(ops, grid, tg, params, xi1, xi2, obs_mask);

    // CG state lives on stacked pairs [zeta0; theta0].
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return h * acc;
    };
    auto apply_op = [&](const std::vector<double>& v) {
        std::span<const double> zeta0(v.data(), n);
        std::span<const double> theta0(v.data() + n, n);
        GramianApplication g =
            gramian_apply(ops, grid, tg, params, omega, obs_mask, zeta0, theta0);
        std::vector<double> out(2 * n);
        for (int i = 0; i < n; ++i) {
            out[i] = g.p0[i] + cfg.epsilon * v[i];
            out[n + i] = g.q0[i] + cfg.epsilon * v[n + i];
        }
        return out;
    };

    std::vector<double> b(2 * n);
    for (int i = 0; i < n; ++i) {
        b[i] = -offset.p0[i];
        b[n + i] = -offset.q0[i];
    }
    const double b_norm = std::sqrt(dot(b, b));

    HumResult result;
    result.epsilon = cfg.epsilon;
    result.uncontrolled_norm =
        std::sqrt(dot(b, b));

    std::vector<double> x(2 * n, 0.0);
    if (b_norm > 0.0) {
        std::vector<double> r = b;
        std::vector<double> p = r;
        double rr = dot(r, r);
        int it = 0;
        while (it < cfg.cg_max_iter) {
            ++it;
            std::vector<double> ap = apply_op(p);
            const double p_ap = dot(p, ap);
            if (!(p_ap > 0.0)) break;  // operator is SPD; loss of positivity
                                       // means we are at roundoff level
            const double alpha = rr / p_ap;
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            const double rr_new = dot(r, r);
            if (std::sqrt(rr_new) <= cfg.cg_tol * b_norm) {
                rr = rr_new;
                break;
            }
            const double beta = rr_new / rr;
            rr = rr_new;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        }
        result.cg_iters = it;
        result.cg_rel_residual = std::sqrt(rr) / b_norm;
        result.converged = result.cg_rel_residual <= cfg.cg_tol;
    } else {
        result.cg_iters = 0;
        result.cg_rel_residual = 0.0;
        result.converged = true;
    }

    result.zeta0_star.assign(x.begin(), x.begin() + n);
    result.theta0_star.assign(x.begin() + n, x.end());

    // Recompute the adjoint at the minimizer and run the true controlled
    // cascade to report the achieved residual.
    AdjointSolution adj = solve_adjoint(ops, grid, tg, params,
                                        result.zeta0_star, result.theta0_star,
                                        obs_mask);
    ControlFields traces = trace_fields(grid, tg, adj);
    CascadeSolution cas =
        solve_cascade(ops, grid, tg, params, {}, {}, &traces.h1, &traces.h2,
                      xi1, xi2, &omega, obs_mask);
    result.p0 = extract_level0(cas.p);
    result.q0 = extract_level0(cas.q);

    ControlFields masked = controls_from_adjoint(grid, tg, adj, omega);
    result.h1 = std::move(masked.h1);
    result.h2 = std::move(masked.h2);

    double res2 = 0.0;
    double gap2 = 0.0;
    for (int i = 0; i < n; ++i) {
        res2 += result.p0[i] * result.p0[i] + result.q0[i] * result.q0[i];
        const double gp = result.p0[i] + cfg.epsilon * result.zeta0_star[i];
        const double gq = result.q0[i] + cfg.epsilon * result.theta0_star[i];
        gap2 += gp * gp + gq * gq;
    }
    result.residual_norm = std::sqrt(h * res2);
    const double scale = std::max(result.uncontrolled_norm, 1e-300);
    result.duality_gap = std::sqrt(h * gap2) / scale;
    return result;
}

} // namespace ksi
