#include "ksinsense/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ksinsense/operators.hpp"

namespace ksi {

namespace {

/// Midpoint snapshot of a field and its discrete derivatives.
struct MidpointDerivatives {
    std::vector<double> q, qx, qxx, qxxx, qxxxx, qt;
};

class MidpointEvaluator {
public:
    MidpointEvaluator(const Grid& grid, const TimeGrid& tg)
        : n_(grid.n_interior()), dt_(tg.dt()),
          d1_(assemble_d1(grid)), d2_(assemble_d2(grid)),
          d4_(assemble_d4(grid)) {}

    MidpointDerivatives eval(const SpaceTimeField& f, int cell) const {
        MidpointDerivatives out;
        auto lo = f.level(cell);
        auto hi = f.level(cell + 1);
        out.q.resize(n_);
        out.qt.resize(n_);
        for (int i = 0; i < n_; ++i) {
            out.q[i] = 0.5 * (lo[i] + hi[i]);
            out.qt[i] = (hi[i] - lo[i]) / dt_;
        }
        out.qx = d1_.apply(out.q);
        out.qxx = d2_.apply(out.q);
        out.qxxx = d1_.apply(out.qxx);
        out.qxxxx = d4_.apply(out.q);
        return out;
    }

private:
    int n_;
    double dt_;
    BandedMatrix d1_, d2_, d4_;
};

/// exp(expo) * v^2 accumulated with overflow detection.
struct Accumulator {
    double value = 0.0;
    bool overflow = false;

    void add(double expo, double v) {
        const double w = std::exp(expo);
        if (std::isinf(w) && v != 0.0) overflow = true;
        const double term = w * v * v;
        if (std::isinf(term)) overflow = true;
        if (!std::isnan(term)) value += term;
    }
};

} // namespace

FunctionalValue eval_I_KS(const SpaceTimeField& q, const WeightSet& ws,
                          const Grid& grid, const TimeGrid& tg) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double s = ws.params.s;
    const double lam = ws.params.lambda;
    const double cell_w = grid.h() * tg.dt();
    MidpointEvaluator mev(grid, tg);

    const double ls = std::log(s);
    Accumulator acc;
    for (int j = 0; j < m; ++j) {
        MidpointDerivatives d = mev.eval(q, j);
        for (int i = 0; i < n; ++i) {
            const int node = i + 1;
            const double phi = ws.at(ws.phi, j, node);
            const double lxi = std::log(ws.at(ws.xi, j, node));
            const double base = -2.0 * s * phi;
            acc.add(base + 7.0 * (ls + lxi) + 8.0 * std::log(lam), d.q[i]);
            acc.add(base + 5.0 * (ls + lxi) + 6.0 * std::log(lam), d.qx[i]);
            acc.add(base + 3.0 * (ls + lxi) + 4.0 * std::log(lam), d.qxx[i]);
            acc.add(base + 1.0 * (ls + lxi) + 2.0 * std::log(lam), d.qxxx[i]);
            acc.add(base - (ls + lxi), d.qt[i]);
            acc.add(base - (ls + lxi), d.qxxxx[i]);
        }
    }
    return FunctionalValue{acc.value * cell_w, acc.overflow};
}

FunctionalValue eval_I_H(const SpaceTimeField& q, double r, const WeightSet& ws,
                         const Grid& grid, const TimeGrid& tg) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double s = ws.params.s;
    const double lam = ws.params.lambda;
    const double cell_w = grid.h() * tg.dt();
    MidpointEvaluator mev(grid, tg);

    const double ls = std::log(s);
    const double ll = std::log(lam);
    Accumulator acc;
    for (int j = 0; j < m; ++j) {
        MidpointDerivatives d = mev.eval(q, j);
        for (int i = 0; i < n; ++i) {
            const int node = i + 1;
            const double phi = ws.at(ws.phi, j, node);
            const double lxi = std::log(ws.at(ws.xi, j, node));
            const double base = -2.0 * s * phi;
            acc.add(base + (r - 4.0) * (ls + lxi) + (r - 3.0) * ll, d.qt[i]);
            acc.add(base + (r - 4.0) * (ls + lxi) + (r - 3.0) * ll, d.qxx[i]);
            acc.add(base + (r - 2.0) * (ls + lxi) + (r - 1.0) * ll, d.qx[i]);
            acc.add(base + r * (ls + lxi) + (r + 1.0) * ll, d.q[i]);
        }
    }
    return FunctionalValue{acc.value * cell_w, acc.overflow};
}

namespace {

/// Weighted squared integral of one field over the mesh:
/// sum exp(w_exponent(j, node)) * value^2 * mask, for LHS extras and RHS
/// observation terms.
template <typename ExpoFn, typename ValueFn>
FunctionalValue weighted_sq(const Grid& grid, const TimeGrid& tg, int m,
                            ExpoFn expo, ValueFn value,
                            const IndicatorMask* mask) {
    const int n = grid.n_interior();
    Accumulator acc;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
            const double mv = mask ? mask->weight(i) : 1.0;
            if (mv == 0.0) continue;
            acc.add(expo(j, i), std::sqrt(mv) * value(j, i));
        }
    }
    return FunctionalValue{acc.value * grid.h() * tg.dt(), acc.overflow};
}

} // namespace

CarlemanFunctionalReport carleman_ratio(AlphaRegime regime,
                                        std::span<const double> zeta0,
                                        std::span<const double> theta0,
                                        const WeightSet& ws, const Grid& grid,
                                        const TimeGrid& tg,
                                        const PhysicsParams& params,
                                        const IndicatorMask& omega0) {
    PhysicsParams p = params;
    switch (regime) {
        case AlphaRegime::Zero: p.alpha = 0.0; break;
        case AlphaRegime::One: p.alpha = 1.0; break;
        case AlphaRegime::Interior: break;
    }
    AdjointSolution adj = solve_adjoint(grid, tg, p, zeta0, theta0, omega0);

    const int m = tg.n_steps();
    const double s = ws.params.s;
    const double lam = ws.params.lambda;
    const double ls = std::log(s);
    const double ll = std::log(lam);
    MidpointEvaluator mev(grid, tg);

    // Midpoint caches for the fields entering regime-specific terms.
    std::vector<MidpointDerivatives> du(m), dzeta(m), dtheta(m), dw(m);
    for (int j = 0; j < m; ++j) {
        du[j] = mev.eval(adj.u, j);
        dzeta[j] = mev.eval(adj.zeta, j);
        dtheta[j] = mev.eval(adj.theta, j);
        dw[j] = mev.eval(adj.w, j);
    }

    auto phi_of = [&](int j, int i) { return ws.at(ws.phi, j, i + 1); };
    auto lxi_of = [&](int j, int i) {
        return std::log(ws.at(ws.xi, j, i + 1));
    };

    CarlemanFunctionalReport rep;
    FunctionalValue iks_u = eval_I_KS(adj.u, ws, grid, tg);
    FunctionalValue ih_w3 = eval_I_H(adj.w, 3.0, ws, grid, tg);
    rep.lhs_terms.emplace_back("I_KS(u)", iks_u.value);
    rep.lhs_terms.emplace_back("I_H(w;3)", ih_w3.value);
    rep.overflow = iks_u.overflow || ih_w3.overflow;

    FunctionalValue rhs_u, rhs_w;
    switch (regime) {
        case AlphaRegime::Interior: {
            rep.regime = "interior";
            FunctionalValue iks_z = eval_I_KS(adj.zeta, ws, grid, tg);
            FunctionalValue ih_t3 = eval_I_H(adj.theta, 3.0, ws, grid, tg);
            rep.lhs_terms.emplace_back("I_KS(zeta)", iks_z.value);
            rep.lhs_terms.emplace_back("I_H(theta;3)", ih_t3.value);
            rep.overflow = rep.overflow || iks_z.overflow || ih_t3.overflow;
            rhs_u = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 15.0 * (ls + lxi_of(j, i)) +
                           16.0 * ll;
                },
                [&](int j, int i) { return du[j].q[i]; }, &omega0);
            rhs_w = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 9.0 * (ls + lxi_of(j, i)) +
                           10.0 * ll;
                },
                [&](int j, int i) { return dw[j].q[i]; }, &omega0);
            break;
        }
        case AlphaRegime::Zero: {
            rep.regime = "zero";
            // zeta enters through its x-derivative plus the boundary-weight
            // zero-order term; theta carries the r = 9 ladder.
            FunctionalValue zx = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 7.0 * (ls + lxi_of(j, i)) +
                           8.0 * ll;
                },
                [&](int j, int i) { return dzeta[j].qx[i]; }, nullptr);
            FunctionalValue zhat = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    (void)i;
                    return -2.0 * s * ws.phi_hat[j] +
                           7.0 * (ls + std::log(ws.xi_star[j])) + 8.0 * ll;
                },
                [&](int j, int i) { return dzeta[j].q[i]; }, nullptr);
            FunctionalValue ih_t9 = eval_I_H(adj.theta, 9.0, ws, grid, tg);
            rep.lhs_terms.emplace_back("s^7l^8|zeta_x|^2", zx.value);
            rep.lhs_terms.emplace_back("s^7l^8(hat)|zeta|^2", zhat.value);
            rep.lhs_terms.emplace_back("I_H(theta;9)", ih_t9.value);
            rep.overflow =
                rep.overflow || zx.overflow || zhat.overflow || ih_t9.overflow;
            auto obs_expo = [&](int j, int i, double pow_xi, double pow_l) {
                return -10.0 * s * phi_of(j, i) + 8.0 * s * ws.phi_hat[j] +
                       pow_xi * (ls + lxi_of(j, i)) + pow_l * ll;
            };
            rhs_u = weighted_sq(
                grid, tg, m,
                [&](int j, int i) { return obs_expo(j, i, 39.0, 24.0); },
                [&](int j, int i) { return du[j].q[i]; }, &omega0);
            rhs_w = weighted_sq(
                grid, tg, m,
                [&](int j, int i) { return obs_expo(j, i, 41.0, 26.0); },
                [&](int j, int i) { return dw[j].q[i]; }, &omega0);
            break;
        }
        case AlphaRegime::One: {
            rep.regime = "one";
            FunctionalValue iks_z = eval_I_KS(adj.zeta, ws, grid, tg);
            FunctionalValue tx = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 3.0 * (ls + lxi_of(j, i)) +
                           4.0 * ll;
                },
                [&](int j, int i) { return dtheta[j].qx[i]; }, nullptr);
            FunctionalValue txx = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + (ls + lxi_of(j, i)) +
                           2.0 * ll;
                },
                [&](int j, int i) { return dtheta[j].qxx[i]; }, nullptr);
            rep.lhs_terms.emplace_back("I_KS(zeta)", iks_z.value);
            rep.lhs_terms.emplace_back("s^3l^4|theta_x|^2", tx.value);
            rep.lhs_terms.emplace_back("sl^2|theta_xx|^2", txx.value);
            rep.overflow =
                rep.overflow || iks_z.overflow || tx.overflow || txx.overflow;
            rhs_u = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 79.0 * (ls + lxi_of(j, i)) +
                           80.0 * ll;
                },
                [&](int j, int i) { return du[j].q[i]; }, &omega0);
            rhs_w = weighted_sq(
                grid, tg, m,
                [&](int j, int i) {
                    return -2.0 * s * phi_of(j, i) + 73.0 * (ls + lxi_of(j, i)) +
                           74.0 * ll;
                },
                [&](int j, int i) { return dw[j].q[i]; }, &omega0);
            break;
        }
    }

    rep.overflow = rep.overflow || rhs_u.overflow || rhs_w.overflow;
    rep.lhs = 0.0;
    for (const auto& [name, v] : rep.lhs_terms) {
        (void)name;
        rep.lhs += v;
    }
    rep.rhs = rhs_u.value + rhs_w.value;
    if (!(rep.rhs >= 1e-300)) {
        throw DegenerateObservation(
            "carleman_ratio: observation side below 1e-300 (adjoint invisible "
            "from omega0 at this resolution)");
    }
    rep.ratio = rep.lhs / rep.rhs;
    return rep;
}

namespace {

/// Dense symmetric-positive-definite solve via Cholesky (small systems).
class DenseChol {
public:
    explicit DenseChol(std::vector<double> a, int n) : l_(std::move(a)), n_(n) {
        for (int j = 0; j < n_; ++j) {
            double d = l_[j * n_ + j];
            for (int k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
            if (!(d > 0.0)) {
                throw EigFailed("observability: regularized form not SPD");
            }
            d = std::sqrt(d);
            l_[j * n_ + j] = d;
            for (int i = j + 1; i < n_; ++i) {
                double v = l_[i * n_ + j];
                for (int k = 0; k < j; ++k)
                    v -= l_[i * n_ + k] * l_[j * n_ + k];
                l_[i * n_ + j] = v / d;
            }
        }
    }

    std::vector<double> solve(std::span<const double> b) const {
        std::vector<double> x(b.begin(), b.end());
        for (int i = 0; i < n_; ++i) {
            double v = x[i];
            for (int k = 0; k < i; ++k) v -= l_[i * n_ + k] * x[k];
            x[i] = v / l_[i * n_ + i];
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double v = x[i];
            for (int k = i + 1; k < n_; ++k) v -= l_[k * n_ + i] * x[k];
            x[i] = v / l_[i * n_ + i];
        }
        return x;
    }

private:
    std::vector<double> l_;
    int n_;
};

} // namespace

ObservabilityEstimate estimate_observability(const IndicatorMask& omega,
                                             const WeightSet& ws,
                                             const Grid& grid,
                                             const TimeGrid& tg,
                                             const PhysicsParams& params,
                                             std::span<const double> mu_list,
                                             int subspace_dim) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double h = grid.h();
    const double dt = tg.dt();
    const int full = 2 * n;
    const int dim = (subspace_dim > 0 && subspace_dim < full) ? subspace_dim : full;

    // Basis: coordinate vectors, or leading sine modes alternating between
    // the two components when a subspace is requested.
    auto basis_vector = [&](int a) {
        std::vector<double> v(full, 0.0);
        if (dim == full) {
            v[a] = 1.0;
        } else {
            const int mode = a / 2 + 1;
            const int comp = a % 2;
            for (int i = 0; i < n; ++i) {
                v[comp * n + i] =
                    std::sqrt(2.0) * std::sin(mode * M_PI * grid.x_interior(i));
            }
        }
        return v;
    };

    StepOperators ops = StepOperators::build(grid, tg, params);
    std::vector<AdjointSolution> sols;
    sols.reserve(dim);
    for (int a = 0; a < dim; ++a) {
        std::vector<double> v = basis_vector(a);
        sols.push_back(solve_adjoint(ops, grid, tg, params,
                                     std::span<const double>(v.data(), n),
                                     std::span<const double>(v.data() + n, n),
                                     omega));
    }

    std::vector<double> rho_m2(m);
    for (int j = 0; j < m; ++j) rho_m2[j] = std::exp(-2.0 * ws.log_rho[j]);

    // Trapezoid-within-cell quadrature weighted at the midpoint value.
    auto form_entry = [&](const AdjointSolution& fa, const AdjointSolution& fb,
                          bool use_rho) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            double lo = 0.0;
            double hi = 0.0;
            auto ua = fa.u.level(j), ub = fb.u.level(j);
            auto wa = fa.w.level(j), wb = fb.w.level(j);
            auto ua1 = fa.u.level(j + 1), ub1 = fb.u.level(j + 1);
            auto wa1 = fa.w.level(j + 1), wb1 = fb.w.level(j + 1);
            for (int i = 0; i < n; ++i) {
                const double mw = use_rho ? 1.0 : omega.weight(i);
                if (mw == 0.0) continue;
                lo += mw * (ua[i] * ub[i] + wa[i] * wb[i]);
                hi += mw * (ua1[i] * ub1[i] + wa1[i] * wb1[i]);
            }
            const double cell = 0.5 * (lo + hi);
            acc += (use_rho ? rho_m2[j] : 1.0) * cell;
        }
        return acc * h * dt;
    };

    std::vector<double> a_form(static_cast<std::size_t>(dim) * dim);
    std::vector<double> b_form(static_cast<std::size_t>(dim) * dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = r; c < dim; ++c) {
            const double av = form_entry(sols[r], sols[c], true);
            const double bv = form_entry(sols[r], sols[c], false);
            a_form[r * dim + c] = a_form[c * dim + r] = av;
            b_form[r * dim + c] = b_form[c * dim + r] = bv;
        }
    }

    ObservabilityEstimate est;
    est.n_space = n;
    est.n_steps = m;
    est.basis_dim = dim;

    auto mat_vec = [&](const std::vector<double>& mat,
                       const std::vector<double>& x) {
        std::vector<double> y(dim, 0.0);
        for (int r = 0; r < dim; ++r) {
            double acc = 0.0;
            for (int c = 0; c < dim; ++c) acc += mat[r * dim + c] * x[c];
            y[r] = acc;
        }
        return y;
    };

    double best_mu = std::numeric_limits<double>::infinity();
    for (double mu : mu_list) {
        if (!(mu > 0.0)) throw Error("estimate_observability: mu must be > 0");
        std::vector<double> reg = b_form;
        for (int i = 0; i < dim; ++i) reg[i * dim + i] += mu;
        DenseChol chol(reg, dim);

        std::vector<double> x(dim);
        for (int i = 0; i < dim; ++i) x[i] = 1.0 + static_cast<double>(i) / dim;
        double lambda_old = 0.0;
        double lambda = 0.0;
        bool converged = false;
        for (int it = 0; it < 10000; ++it) {
            std::vector<double> ax = mat_vec(a_form, x);
            double ax_norm = 0.0;
            for (double v : ax) ax_norm += v * v;
            if (ax_norm == 0.0) {
                lambda = 0.0;
                converged = true;
                break;
            }
            std::vector<double> y = chol.solve(ax);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < dim; ++i) {
                num += x[i] * ax[i];
            }
            std::vector<double> rx = mat_vec(reg, x);
            for (int i = 0; i < dim; ++i) den += x[i] * rx[i];
            lambda = num / den;
            double nrm = 0.0;
            for (double v : y) nrm += v * v;
            nrm = std::sqrt(nrm);
            for (int i = 0; i < dim; ++i) x[i] = y[i] / nrm;
            if (it > 0 && std::abs(lambda - lambda_old) <=
                              1e-12 * std::max(std::abs(lambda), 1e-300)) {
                converged = true;
                break;
            }
            lambda_old = lambda;
        }
        if (!converged) {
            throw EigFailed("estimate_observability: power iteration did not "
                            "converge in 10^4 steps");
        }
        est.mu.push_back(mu);
        est.c_obs.push_back(lambda);
        if (mu < best_mu) {
            best_mu = mu;
            est.dominant_value = lambda;
            est.dominant_vector = x;
        }
    }
    return est;
}

} // namespace ksi
