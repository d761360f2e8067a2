#include "ksinsense/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ksi {

double NuFunction::eval(double x) const {
    const double c = mobius_c;
    const double mob = x / (x + c * (1.0 - x));
    return 4.0 * mob * (1.0 - mob);
}

double NuFunction::eval_deriv(double x) const {
    const double c = mobius_c;
    const double den = x + c * (1.0 - x);
    const double mob = x / den;
    const double dmob = c / (den * den);
    return 4.0 * dmob * (1.0 - 2.0 * mob);
}

NuFunction build_nu(const Grid& grid, double a, double b) {
    if (!(0.0 < a && a < b && b < 1.0)) {
        throw BadInterval("build_nu: require 0 < a < b < 1");
    }
    NuFunction nu;
    nu.x0 = 0.5 * (a + b);
    nu.mobius_c = nu.x0 / (1.0 - nu.x0);
    nu.omega0_a = a;
    nu.omega0_b = b;
    nu.norm_inf = 1.0;

    const int nn = grid.n_cells() + 1;
    nu.values.resize(nn);
    nu.derivs.resize(nn);
    double c_lower = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nn; ++j) {
        const double x = grid.x(j);
        nu.values[j] = nu.eval(x);
        nu.derivs[j] = nu.eval_deriv(x);
        const bool outside = !(x > a && x < b);
        if (outside) c_lower = std::min(c_lower, std::abs(nu.derivs[j]));
    }
    nu.c_lower = c_lower;
    return nu;
}

NuFunction build_nu(const Grid& grid, const IndicatorMask& omega0) {
    return build_nu(grid, omega0.a(), omega0.b());
}

void CarlemanParams::validate() const {
    if (!(m > 0.0) || !(k > m)) {
        throw DegenerateParams("CarlemanParams: require k > m > 0, got m = " +
                               std::to_string(m) + ", k = " + std::to_string(k));
    }
    if (!(lambda > 1.0)) {
        throw DegenerateParams("CarlemanParams: require lambda > 1");
    }
    if (!(s > 0.0)) {
        throw DegenerateParams("CarlemanParams: require s > 0");
    }
}

double WeightSet::ell(double t) const {
    return (t <= 0.5 * T) ? t * (T - t) : 0.25 * T * T;
}

double WeightSet::phi_at(double t, double x) const {
    const double top = std::exp(params.lambda * (1.0 + 1.0 / params.m) *
                                params.k * nu.norm_inf);
    const double mid = std::exp(params.lambda *
                                (params.k * nu.norm_inf + nu.eval(x)));
    return (top - mid) / std::pow(t * (T - t), params.m);
}

double WeightSet::xi_at(double t, double x) const {
    const double mid = std::exp(params.lambda *
                                (params.k * nu.norm_inf + nu.eval(x)));
    return mid / std::pow(t * (T - t), params.m);
}

double WeightSet::frak_s_at(double t, double x) const {
    const double top = std::exp(params.lambda * (1.0 + 1.0 / params.m) *
                                params.k * nu.norm_inf);
    const double mid = std::exp(params.lambda *
                                (params.k * nu.norm_inf + nu.eval(x)));
    return (top - mid) / std::pow(ell(t), params.m);
}

double WeightSet::frak_z_at(double t, double x) const {
    const double mid = std::exp(params.lambda *
                                (params.k * nu.norm_inf + nu.eval(x)));
    return mid / std::pow(ell(t), params.m);
}

WeightSet build_weights(const NuFunction& nu, const CarlemanParams& params,
                        const Grid& grid, const TimeGrid& tg) {
    params.validate();
    WeightSet ws;
    ws.params = params;
    ws.nu = nu;
    ws.T = tg.T();
    ws.n_tmid = tg.n_steps();
    ws.n_nodes = grid.n_cells() + 1;

    const std::size_t total =
        static_cast<std::size_t>(ws.n_tmid) * ws.n_nodes;
    ws.phi.resize(total);
    ws.xi.resize(total);
    ws.frak_s.resize(total);
    ws.frak_z.resize(total);
    ws.phi_hat.resize(ws.n_tmid);
    ws.xi_star.resize(ws.n_tmid);
    ws.frak_s_hat.resize(ws.n_tmid);
    ws.frak_z_star.resize(ws.n_tmid);
    ws.log_rho.resize(ws.n_tmid);
    ws.rho.resize(ws.n_tmid);
    ws.t_mid.resize(ws.n_tmid);

    for (int j = 0; j < ws.n_tmid; ++j) {
        const double t = tg.t_mid(j);
        ws.t_mid[j] = t;
        for (int node = 0; node < ws.n_nodes; ++node) {
            const double x = grid.x(node);
            const std::size_t idx =
                static_cast<std::size_t>(j) * ws.n_nodes + node;
            ws.phi[idx] = ws.phi_at(t, x);
            ws.xi[idx] = ws.xi_at(t, x);
            ws.frak_s[idx] = ws.frak_s_at(t, x);
            ws.frak_z[idx] = ws.frak_z_at(t, x);
        }
        // The max of phi and min of xi sit on the walls where nu vanishes.
        ws.phi_hat[j] = ws.phi_at(t, 0.0);
        ws.xi_star[j] = ws.xi_at(t, 0.0);
        ws.frak_s_hat[j] = ws.frak_s_at(t, 0.0);
        ws.frak_z_star[j] = ws.frak_z_at(t, 0.0);
        ws.log_rho[j] = params.s * ws.frak_s_hat[j];
        ws.rho[j] = std::exp(ws.log_rho[j]);
    }
    return ws;
}

WeightEstimateReport audit_weight_estimates(const WeightSet& ws, double b,
                                            const Grid& grid,
                                            const TimeGrid& tg) {
    if (!(b > 0.0)) throw Error("audit_weight_estimates: require b > 0");
    const int nt = ws.n_tmid;
    const int nn = ws.n_nodes;
    const double s = ws.params.s;
    const double m = ws.params.m;
    const double lambda = ws.params.lambda;
    const double h = grid.h();
    const double dt = tg.dt();
    const double t_pow = std::pow(tg.T(), 2.0 * m - 2.0);

    // The target ratios equal |d(log g)| / weight with g = e^{-2s phi} xi^b,
    // since d(g)/g = -2 s d(phi) + b d(log xi). Differencing phi and log xi
    // keeps every quantity representable where g itself underflows, and the
    // finite-difference inflation near the time singularity depends only on
    // the midpoint index, so the suprema are stable under mesh refinement.
    WeightEstimateReport rep;
    rep.t_m_evaluated = m > 1.0;
    auto phi_of = [&](int j, int node) { return ws.at(ws.phi, j, node); };
    auto lxi_of = [&](int j, int node) {
        return std::log(ws.at(ws.xi, j, node));
    };
    for (int j = 0; j < nt; ++j) {
        for (int node = 1; node + 1 < nn; ++node) {
            const double phi_x =
                (phi_of(j, node + 1) - phi_of(j, node - 1)) / (2.0 * h);
            const double lxi_x =
                (lxi_of(j, node + 1) - lxi_of(j, node - 1)) / (2.0 * h);
            const double dlg = -2.0 * s * phi_x + b * lxi_x;
            const double xi = ws.at(ws.xi, j, node);
            const double r = std::abs(dlg) / (s * lambda * xi);
            if (std::isfinite(r)) {
                rep.ratio_x = std::max(rep.ratio_x, r);
                ++rep.points_used_x;
            }
        }
    }
    for (int j = 1; j + 1 < nt; ++j) {
        for (int node = 0; node < nn; ++node) {
            const double phi_t =
                (phi_of(j + 1, node) - phi_of(j - 1, node)) / (2.0 * dt);
            const double lxi_t =
                (lxi_of(j + 1, node) - lxi_of(j - 1, node)) / (2.0 * dt);
            const double dlg = std::abs(-2.0 * s * phi_t + b * lxi_t);
            const double xi = ws.at(ws.xi, j, node);
            const double r = dlg / (s * std::pow(xi, 1.0 + 1.0 / m));
            if (std::isfinite(r)) {
                rep.ratio_t = std::max(rep.ratio_t, r);
                ++rep.points_used_t;
            }
            if (rep.t_m_evaluated) {
                const double rm = dlg / (t_pow * s * xi * xi);
                if (std::isfinite(rm)) rep.ratio_t_m = std::max(rep.ratio_t_m, rm);
            }
        }
    }
    return rep;
}

GoodSignReport audit_good_sign(const NuFunction& nu, double m, double k,
                               double lambda, int p) {
    if (p < 2) throw Error("audit_good_sign: require p >= 2");
    const double lead = 2.0 * std::exp((lambda / m) * k * nu.norm_inf);
    double delta = std::numeric_limits<double>::infinity();
    auto bracket = [&](double nu_x) {
        return lead - p * std::exp(lambda * nu_x) + p - 2.0;
    };
    for (double v : nu.values) delta = std::min(delta, bracket(v));
    // Also probe the critical point itself in case it falls between nodes.
    delta = std::min(delta, bracket(nu.norm_inf));
    return GoodSignReport{delta, delta > 0.0};
}

GoodSignReport audit_good_sign(const WeightSet& ws, int p) {
    return audit_good_sign(ws.nu, ws.params.m, ws.params.k, ws.params.lambda, p);
}

double search_k(const NuFunction& nu, double m, double lambda, int p) {
    if (p < 3) throw Error("search_k: require p >= 3");
    for (int j = 1;; ++j) {
        const double k = m * std::pow(1.1, j);
        if (k > 100.0 * m) {
            throw SearchFailed("search_k: no k <= 100 m reaches margin 0.1 "
                               "(lambda/m inconsistent)");
        }
        const GoodSignReport rep = audit_good_sign(nu, m, k, lambda, p);
        if (rep.delta >= 0.1) return k;
    }
}

SourceAdmissibility check_source_admissibility(const SpaceTimeField& xi1,
                                               const SpaceTimeField& xi2,
                                               const WeightSet& ws,
                                               const Grid& grid,
                                               const TimeGrid& tg,
                                               double cap) {
    const int m = tg.n_steps();
    const int n = grid.n_interior();
    const double h = grid.h();
    const double dt = tg.dt();
    const double neg_inf = -std::numeric_limits<double>::infinity();

    auto log_norm = [&](const SpaceTimeField& f) {
        // log of sum_j exp(2 log rho_j) * dt * |f at midpoint j|_h^2,
        // accumulated by the usual max-shift so rho overflow stays exact.
        std::vector<double> terms;
        terms.reserve(m);
        double shift = neg_inf;
        for (int j = 0; j < m; ++j) {
            double slice = 0.0;
            auto lo = f.level(j);
            auto hi = f.level(j + 1);
            for (int i = 0; i < n; ++i) {
                const double mid = 0.5 * (lo[i] + hi[i]);
                slice += mid * mid;
            }
            slice *= h * dt;
            if (slice <= 0.0) {
                terms.push_back(neg_inf);
                continue;
            }
            const double lt = 2.0 * ws.log_rho[j] + std::log(slice);
            terms.push_back(lt);
            shift = std::max(shift, lt);
        }
        if (shift == neg_inf) return neg_inf;
        double acc = 0.0;
        for (double lt : terms) {
            if (lt != neg_inf) acc += std::exp(lt - shift);
        }
        return shift + std::log(acc);
    };

    SourceAdmissibility out;
    out.cap = cap;
    const double l1 = log_norm(xi1);
    const double l2 = log_norm(xi2);
    out.log10_norm_1 = l1 / std::log(10.0);
    out.log10_norm_2 = l2 / std::log(10.0);
    out.weighted_norm_1 = (l1 == neg_inf) ? 0.0 : std::exp(l1);
    out.weighted_norm_2 = (l2 == neg_inf) ? 0.0 : std::exp(l2);
    out.admissible = out.weighted_norm_1 < cap && out.weighted_norm_2 < cap;
    return out;
}

} // namespace ksi
