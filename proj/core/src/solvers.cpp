#include "ksinsense/solvers.hpp"

#include <cmath>

namespace ksi {

namespace {

void check_initial(std::span<const double> v, int n, const char* name) {
    if (!v.empty() && static_cast<int>(v.size()) != n) {
        throw Error(std::string("solver: initial field ") + name +
                    " has wrong size");
    }
}

void check_field(const SpaceTimeField* f, int levels, int n, const char* name) {
    if (f && (f->n_levels() != levels || f->n_nodes() != n)) {
        throw Error(std::string("solver: field ") + name +
                    " not sized to the mesh");
    }
}

/// Interleaved source slice at one time level: (f1 + m h1, f2 + m h2).
void gather_source(std::vector<double>& out, int level, int n,
                   const SpaceTimeField* f1, const SpaceTimeField* f2,
                   const SpaceTimeField* h1, const SpaceTimeField* h2,
                   const IndicatorMask* omega) {
    std::fill(out.begin(), out.end(), 0.0);
    if (f1) {
        auto s = f1->level(level);
        for (int i = 0; i < n; ++i) out[idx_a(i)] += s[i];
    }
    if (f2) {
        auto s = f2->level(level);
        for (int i = 0; i < n; ++i) out[idx_b(i)] += s[i];
    }
    if (h1) {
        auto s = h1->level(level);
        for (int i = 0; i < n; ++i) out[idx_a(i)] += omega->weight(i) * s[i];
    }
    if (h2) {
        auto s = h2->level(level);
        for (int i = 0; i < n; ++i) out[idx_b(i)] += omega->weight(i) * s[i];
    }
}

ForwardSolution run_forward(const StepOperators* ops, const Grid& grid,
                            const TimeGrid& tg, const PhysicsParams& params,
                            std::span<const double> y0,
                            std::span<const double> z0,
                            const SpaceTimeField* f1, const SpaceTimeField* f2,
                            const SpaceTimeField* h1, const SpaceTimeField* h2,
                            const IndicatorMask* omega, TimeScheme scheme) {
    params.validate();
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double dt = tg.dt();
    check_initial(y0, n, "y0");
    check_initial(z0, n, "z0");
    check_field(f1, m + 1, n, "f1");
    check_field(f2, m + 1, n, "f2");
    check_field(h1, m + 1, n, "h1");
    check_field(h2, m + 1, n, "h2");
    if ((h1 || h2) && !omega) {
        throw Error("solve_forward: controls given without a control mask");
    }

    ForwardSolution out{SpaceTimeField::zeros(grid, tg),
                        SpaceTimeField::zeros(grid, tg)};
    std::vector<double> state(2 * n, 0.0);
    if (!y0.empty()) {
        for (int i = 0; i < n; ++i) state[idx_a(i)] = y0[i];
    }
    if (!z0.empty()) {
        for (int i = 0; i < n; ++i) state[idx_b(i)] = z0[i];
    }
    for (int i = 0; i < n; ++i) {
        out.y.at(0, i) = state[idx_a(i)];
        out.z.at(0, i) = state[idx_b(i)];
    }

    std::vector<double> src(2 * n), src_prev(2 * n), rhs(2 * n);

    if (scheme == TimeScheme::ImplicitEuler) {
        std::optional<StepOperators> local;
        if (!ops) {
            local.emplace(StepOperators::build(grid, tg, params));
            ops = &*local;
        }
        for (int step = 0; step < m; ++step) {
            gather_source(src, step + 1, n, f1, f2, h1, h2, omega);
            for (int k = 0; k < 2 * n; ++k) rhs[k] = state[k] + dt * src[k];
            state = ops->step_forward(rhs);
            for (int i = 0; i < n; ++i) {
                out.y.at(step + 1, i) = state[idx_a(i)];
                out.z.at(step + 1, i) = state[idx_b(i)];
            }
        }
    } else {
        CrankNicolsonPair cn = crank_nicolson_operators(grid, tg, params);
        cn.lhs.factorize();
        gather_source(src_prev, 0, n, f1, f2, h1, h2, omega);
        for (int step = 0; step < m; ++step) {
            gather_source(src, step + 1, n, f1, f2, h1, h2, omega);
            if (step < 2) {
                // Rannacher startup: two implicit-Euler half-steps damp the
                // stiff transients that plain Crank-Nicolson leaves ringing.
                // The lhs matrix I + (dt/2) L is exactly the half-step map.
                for (int half = 0; half < 2; ++half) {
                    for (int k = 0; k < 2 * n; ++k) {
                        rhs[k] = state[k] + 0.5 * dt * src[k];
                    }
                    state = cn.lhs.solve(rhs);
                }
            } else {
                std::vector<double> bx = cn.rhs.apply(state);
                for (int k = 0; k < 2 * n; ++k) {
                    rhs[k] = bx[k] + 0.5 * dt * (src_prev[k] + src[k]);
                }
                state = cn.lhs.solve(rhs);
            }
            src_prev = src;
            for (int i = 0; i < n; ++i) {
                out.y.at(step + 1, i) = state[idx_a(i)];
                out.z.at(step + 1, i) = state[idx_b(i)];
            }
        }
    }
    return out;
}

} // namespace

StepOperators StepOperators::build(const Grid& grid, const TimeGrid& tg,
                                   const PhysicsParams& params) {
    BandedMatrix a = step_operator(grid, tg, params, StepDirection::Forward);
    a.factorize();
    return StepOperators(std::move(a));
}

ForwardSolution solve_forward(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* f1, const SpaceTimeField* f2,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const IndicatorMask* omega, TimeScheme scheme) {
    return run_forward(nullptr, grid, tg, params, y0, z0, f1, f2, h1, h2,
                       omega, scheme);
}

ForwardSolution solve_forward(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* f1, const SpaceTimeField* f2,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const IndicatorMask* omega) {
    return run_forward(&ops, grid, tg, params, y0, z0, f1, f2, h1, h2, omega,
                       TimeScheme::ImplicitEuler);
}

BackwardPair backward_from_observation(const StepOperators& ops,
                                       const Grid& grid, const TimeGrid& tg,
                                       const PhysicsParams& params,
                                       const SpaceTimeField& obs4,
                                       const SpaceTimeField& obs2,
                                       const IndicatorMask& obs_mask) {
    params.validate();
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double dt = tg.dt();
    check_field(&obs4, m + 1, n, "obs4");
    check_field(&obs2, m + 1, n, "obs2");

    BackwardPair out{SpaceTimeField::zeros(grid, tg),
                     SpaceTimeField::zeros(grid, tg)};
    std::vector<double> state(2 * n, 0.0);  // zero final data at level M
    std::vector<double> rhs(2 * n);
    for (int level = m - 1; level >= 0; --level) {
        // Coupling sampled at the already-computed forward level (level+1);
        // this is what makes the sweep the exact transpose of the forward
        // solve in the duality pairing.
        const double w = dt * obs_time_weight(level + 1, m);
        auto s4 = obs4.level(level + 1);
        auto s2 = obs2.level(level + 1);
        for (int i = 0; i < n; ++i) {
            const double mo = obs_mask.weight(i);
            rhs[idx_a(i)] = state[idx_a(i)] + w * params.alpha * mo * s4[i];
            rhs[idx_b(i)] = state[idx_b(i)] + w * (1.0 - params.alpha) * mo * s2[i];
        }
        state = ops.step_backward(rhs);
        for (int i = 0; i < n; ++i) {
            out.p4.at(level, i) = state[idx_a(i)];
            out.q2.at(level, i) = state[idx_b(i)];
        }
    }
    return out;
}

CascadeSolution solve_cascade(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const SpaceTimeField* xi1, const SpaceTimeField* xi2,
                              const IndicatorMask* omega,
                              const IndicatorMask& obs_mask) {
    ForwardSolution fwd =
        solve_forward(ops, grid, tg, params, y0, z0, xi1, xi2, h1, h2, omega);
    BackwardPair back =
        backward_from_observation(ops, grid, tg, params, fwd.y, fwd.z, obs_mask);
    return CascadeSolution{std::move(fwd.y), std::move(fwd.z),
                           std::move(back.p4), std::move(back.q2)};
}

CascadeSolution solve_cascade(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> y0,
                              std::span<const double> z0,
                              const SpaceTimeField* h1, const SpaceTimeField* h2,
                              const SpaceTimeField* xi1, const SpaceTimeField* xi2,
                              const IndicatorMask* omega,
                              const IndicatorMask& obs_mask) {
    StepOperators ops = StepOperators::build(grid, tg, params);
    return solve_cascade(ops, grid, tg, params, y0, z0, h1, h2, xi1, xi2,
                         omega, obs_mask);
}

AdjointSolution solve_adjoint(const StepOperators& ops, const Grid& grid,
                              const TimeGrid& tg, const PhysicsParams& params,
                              std::span<const double> zeta0,
                              std::span<const double> theta0,
                              const IndicatorMask& obs_mask) {
    ForwardSolution fwd = solve_forward(ops, grid, tg, params, zeta0, theta0,
                                        nullptr, nullptr, nullptr, nullptr,
                                        nullptr);
    BackwardPair back =
        backward_from_observation(ops, grid, tg, params, fwd.y, fwd.z, obs_mask);
    return AdjointSolution{std::move(back.p4), std::move(back.q2),
                           std::move(fwd.y), std::move(fwd.z)};
}

AdjointSolution solve_adjoint(const Grid& grid, const TimeGrid& tg,
                              const PhysicsParams& params,
                              std::span<const double> zeta0,
                              std::span<const double> theta0,
                              const IndicatorMask& obs_mask) {
    StepOperators ops = StepOperators::build(grid, tg, params);
    return solve_adjoint(ops, grid, tg, params, zeta0, theta0, obs_mask);
}

double duality_pairing(const Grid& grid, const TimeGrid& tg,
                       const SpaceTimeField& source, const IndicatorMask* mask,
                       const SpaceTimeField& trace) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    double acc = 0.0;
    for (int level = 0; level < m; ++level) {
        auto s = source.level(level + 1);
        auto t = trace.level(level);
        double slice = 0.0;
        if (mask) {
            for (int i = 0; i < n; ++i) slice += mask->weight(i) * s[i] * t[i];
        } else {
            for (int i = 0; i < n; ++i) slice += s[i] * t[i];
        }
        acc += slice;
    }
    return acc * tg.dt() * grid.h();
}

} // namespace ksi
