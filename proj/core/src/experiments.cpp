#include "ksinsense/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "ksinsense/io.hpp"
#include "ksinsense/observability.hpp"

namespace ksi {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

int thread_cap(const RunOptions& opt) {
    if (opt.max_threads > 0) return opt.max_threads;
    if (const char* env = std::getenv("KS_INSENSE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string out_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
    return opt.out_dir.empty() ? cfg.output.dir : opt.out_dir;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir);
}

void write_manifest(const std::string& dir, const std::string& command,
                    const ExperimentConfig& cfg) {
    const std::string canon = canonical_json(cfg);
    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["command"] = command;
    manifest["config"] = json::parse(canon);
    manifest["config_hash"] = git_blob_sha1(canon);
    write_text_file(dir + "/run_manifest.json", manifest.dump(2) + "\n");
}

/// Expand the sweep map into per-run configs with suffixed output dirs.
struct SweepPoint {
    ExperimentConfig cfg;
    std::string dir;
};

std::string value_tag(double v) {
    std::string s = format_g17(v);
    for (char& c : s) {
        if (c == '+' ) c = 'p';
        if (c == '-') c = 'm';
        if (c == '.') c = '_';
    }
    return s;
}

std::vector<SweepPoint> expand_sweeps(const ExperimentConfig& base,
                                      const RunOptions& opt,
                                      const std::string& root) {
    std::vector<SweepPoint> pts{{base, root}};
    for (const auto& [key, values] : opt.sweeps) {
        if (key != "epsilon" && key != "alpha") {
            throw ConfigError("sweep parameter must be 'epsilon' or 'alpha', got " +
                              key);
        }
        std::vector<SweepPoint> next;
        for (const SweepPoint& pt : pts) {
            for (double v : values) {
                SweepPoint np = pt;
                if (key == "epsilon") {
                    np.cfg.hum.epsilon = v;
                } else {
                    np.cfg.physics.alpha = v;
                }
                np.dir = pt.dir + "/" + key + "_" + value_tag(v);
                next.push_back(std::move(np));
            }
        }
        pts = std::move(next);
    }
    for (const SweepPoint& pt : pts) pt.cfg.validate();
    return pts;
}

/// Fan the sweep points over at most `threads` workers; each point writes to
/// its own directory. Returns the max exit code.
template <typename Fn>
int run_points(const std::vector<SweepPoint>& pts, int threads, Fn fn) {
    std::atomic<int> worst{kExitOk};
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= pts.size()) return;
            int code = kExitOk;
            try {
                code = fn(pts[i]);
            } catch (const ConfigError& e) {
                std::cerr << e.what() << "\n";
                code = kExitConfigError;
            } catch (const SingularMatrix& e) {
                std::cerr << e.what() << "\n";
                code = kExitDegenerate;
            } catch (const DegenerateObservation& e) {
                std::cerr << e.what() << "\n";
                code = kExitDegenerate;
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                code = kExitDegenerate;
            }
            int cur = worst.load();
            while (code > cur && !worst.compare_exchange_weak(cur, code)) {
            }
        }
    };
    const int nthreads =
        std::min<std::size_t>(threads, pts.size()) > 0
            ? static_cast<int>(std::min<std::size_t>(threads, pts.size()))
            : 1;
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return worst.load();
}

json hum_diagnostics(const HumResult& hum, const PhysicsParams& params) {
    json diag;
    diag["schema_version"] = kSchemaVersion;
    diag["alpha"] = params.alpha;
    diag["epsilon"] = hum.epsilon;
    diag["cg_iters"] = hum.cg_iters;
    diag["cg_relative_residual"] = hum.cg_rel_residual;
    diag["converged"] = hum.converged;
    diag["residual_norm"] = hum.residual_norm;
    diag["uncontrolled_residual_norm"] = hum.uncontrolled_norm;
    diag["duality_gap"] = hum.duality_gap;
    return diag;
}

HumResult run_control_pipeline(const ExperimentConfig& cfg, Problem& prob,
                               const std::string& dir) {
    // Admissibility of the sources under the rho weight is advisory here:
    // warn, do not fail.
    if (prob.xi1 && prob.xi2) {
        try {
            CarlemanSetup carleman = build_carleman(cfg, prob.grid, prob.tg);
            SourceAdmissibility adm = check_source_admissibility(
                *prob.xi1, *prob.xi2, carleman.weights, prob.grid, prob.tg,
                cfg.audit.cap);
            if (!adm.admissible) {
                std::cerr << "warning: sources fail the rho-weighted "
                             "admissibility check (log10 norms "
                          << adm.log10_norm_1 << ", " << adm.log10_norm_2
                          << ")\n";
            }
        } catch (const Error& e) {
            std::cerr << "warning: admissibility check skipped: " << e.what()
                      << "\n";
        }
    }

    HumConfig hum_cfg{cfg.hum.epsilon, cfg.hum.cg_tol, cfg.hum.cg_max_iter};
    HumResult hum = solve_hum(prob.grid, prob.tg, prob.params, prob.omega,
                              prob.obs, prob.xi1_ptr(), prob.xi2_ptr(), hum_cfg);

    write_text_file(dir + "/controls.csv",
                    fields_csv(prob.grid, prob.tg,
                               {{"h1", &hum.h1}, {"h2", &hum.h2}}));
    write_text_file(dir + "/control_diagnostics.json",
                    hum_diagnostics(hum, prob.params).dump(2) + "\n");
    return hum;
}

} // namespace

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
    const std::string root = out_dir(cfg, opt);
    std::vector<SweepPoint> pts = expand_sweeps(cfg, opt, root);
    return run_points(pts, thread_cap(opt), [](const SweepPoint& pt) {
        ensure_dir(pt.dir);
        Problem prob = build_problem(pt.cfg);
        const TimeScheme scheme = pt.cfg.simulate.scheme == "crank-nicolson"
                                      ? TimeScheme::CrankNicolson
                                      : TimeScheme::ImplicitEuler;
        if (pt.cfg.simulate.cascade) {
            CascadeSolution cas =
                solve_cascade(prob.grid, prob.tg, prob.params, {}, {}, nullptr,
                              nullptr, prob.xi1_ptr(), prob.xi2_ptr(), nullptr,
                              prob.obs);
            write_text_file(pt.dir + "/fields.csv",
                            fields_csv(prob.grid, prob.tg,
                                       {{"y", &cas.y},
                                        {"z", &cas.z},
                                        {"p", &cas.p},
                                        {"q", &cas.q}}));
        } else {
            ForwardSolution sol =
                solve_forward(prob.grid, prob.tg, prob.params, {}, {},
                              prob.xi1_ptr(), prob.xi2_ptr(), nullptr, nullptr,
                              nullptr, scheme);
            write_text_file(pt.dir + "/fields.csv",
                            fields_csv(prob.grid, prob.tg,
                                       {{"y", &sol.y}, {"z", &sol.z}}));
        }
        write_manifest(pt.dir, "simulate", pt.cfg);
        return kExitOk;
    });
}

int cmd_control(const ExperimentConfig& cfg, const RunOptions& opt) {
    const std::string root = out_dir(cfg, opt);
    std::vector<SweepPoint> pts = expand_sweeps(cfg, opt, root);
    return run_points(pts, thread_cap(opt), [](const SweepPoint& pt) {
        ensure_dir(pt.dir);
        Problem prob = build_problem(pt.cfg);
        HumResult hum = run_control_pipeline(pt.cfg, prob, pt.dir);
        write_manifest(pt.dir, "control", pt.cfg);
        return hum.converged ? kExitOk : kExitNotConverged;
    });
}

int cmd_verify(const ExperimentConfig& base, const RunOptions& opt) {
    ExperimentConfig cfg = base;
    if (opt.seed) cfg.sentinel.rng_seed = *opt.seed;
    const std::string root = out_dir(cfg, opt);
    std::vector<SweepPoint> pts = expand_sweeps(cfg, opt, root);
    const std::string from = opt.from_dir;
    return run_points(pts, thread_cap(opt), [from](const SweepPoint& pt) {
        ensure_dir(pt.dir);
        Problem prob = build_problem(pt.cfg);

        HumResult hum;
        if (!from.empty()) {
            // Rehydrate a prior control run: controls from CSV, epsilon from
            // the diagnostics; the residual is recomputed from the cascade.
            const std::string controls_path = from + "/controls.csv";
            const std::string diag_path = from + "/control_diagnostics.json";
            if (!fs::exists(controls_path) || !fs::exists(diag_path)) {
                throw ConfigError("cmd_verify: no prior control output under " +
                                  from);
            }
            std::vector<SpaceTimeField> hs = parse_fields_csv(
                read_text_file(controls_path), prob.grid, prob.tg, {"h1", "h2"});
            hum.h1 = std::move(hs[0]);
            hum.h2 = std::move(hs[1]);
            const json diag = json::parse(read_text_file(diag_path));
            hum.epsilon = diag.value("epsilon", 0.0);
            hum.converged = diag.value("converged", false);
            CascadeSolution cas = solve_cascade(
                prob.grid, prob.tg, prob.params, {}, {}, &hum.h1, &hum.h2,
                prob.xi1_ptr(), prob.xi2_ptr(), &prob.omega, prob.obs);
            auto p0 = cas.p.level(0);
            auto q0 = cas.q.level(0);
            hum.p0.assign(p0.begin(), p0.end());
            hum.q0.assign(q0.begin(), q0.end());
            const double h = prob.grid.h();
            hum.residual_norm = std::sqrt(
                inner_h(hum.p0, hum.p0, h) + inner_h(hum.q0, hum.q0, h));
        } else {
            hum = run_control_pipeline(pt.cfg, prob, pt.dir);
        }

        SentinelConfig scfg{pt.cfg.sentinel.tau_list,
                            pt.cfg.sentinel.n_perturbations,
                            pt.cfg.sentinel.rng_seed};
        InsensitivityReport rep = verify_insensitivity(
            prob.grid, prob.tg, prob.params, prob.omega, prob.obs,
            prob.xi1_ptr(), prob.xi2_ptr(), hum, scfg);

        json out;
        out["schema_version"] = kSchemaVersion;
        out["alpha"] = rep.alpha;
        out["epsilon"] = rep.epsilon;
        out["residual_norm"] = rep.residual_norm;
        out["max_abs_derivative"] = rep.max_abs_derivative;
        out["cauchy_schwarz_bound"] = rep.cauchy_schwarz_bound;
        out["rng_seed"] = rep.rng_seed;
        out["per_perturbation"] = json::array();
        for (const PerturbationDerivative& d : rep.per_perturbation) {
            out["per_perturbation"].push_back(
                {{"fd", d.fd}, {"analytic", d.analytic}});
        }
        write_text_file(pt.dir + "/insensitivity_report.json",
                        out.dump(2) + "\n");
        write_manifest(pt.dir, "verify", pt.cfg);
        return hum.converged ? kExitOk : kExitNotConverged;
    });
}

int cmd_audit(const ExperimentConfig& cfg, const RunOptions& opt) {
    const std::string root = out_dir(cfg, opt);
    std::vector<SweepPoint> pts = expand_sweeps(cfg, opt, root);
    return run_points(pts, thread_cap(opt), [](const SweepPoint& pt) {
        ensure_dir(pt.dir);
        const ExperimentConfig& cfg = pt.cfg;
        Problem prob = build_problem(cfg);
        CarlemanSetup carleman = build_carleman(cfg, prob.grid, prob.tg);

        json report;
        report["schema_version"] = kSchemaVersion;
        if (cfg.carleman.k_auto) report["k_min"] = carleman.k_min;
        report["k"] = carleman.params.k;

        int code = kExitOk;
        if (cfg.audit.good_sign) {
            GoodSignReport gs = audit_good_sign(carleman.weights, cfg.audit.p);
            report["good_sign"] = {{"p", cfg.audit.p},
                                   {"delta", gs.delta},
                                   {"holds", gs.holds}};
        }
        if (cfg.audit.weights) {
            std::string csv = "b,ratio_x,ratio_t,ratio_t_m,t_m_evaluated\n";
            for (double b : cfg.audit.b_list) {
                WeightEstimateReport wr =
                    audit_weight_estimates(carleman.weights, b, prob.grid, prob.tg);
                csv += format_g17(b) + "," + format_g17(wr.ratio_x) + "," +
                       format_g17(wr.ratio_t) + "," + format_g17(wr.ratio_t_m) +
                       "," + (wr.t_m_evaluated ? "1" : "0") + "\n";
            }
            write_text_file(pt.dir + "/weight_estimates.csv", csv);
            write_text_file(pt.dir + "/weights.csv",
                            weights_csv(carleman.weights, prob.grid));
        }
        if (cfg.audit.admissibility && prob.xi1 && prob.xi2) {
            SourceAdmissibility adm = check_source_admissibility(
                *prob.xi1, *prob.xi2, carleman.weights, prob.grid, prob.tg,
                cfg.audit.cap);
            report["admissibility"] = {
                {"weighted_norm_1", adm.weighted_norm_1},
                {"weighted_norm_2", adm.weighted_norm_2},
                {"log10_norm_1", adm.log10_norm_1},
                {"log10_norm_2", adm.log10_norm_2},
                {"admissible", adm.admissible},
                {"cap", adm.cap}};
        }
        if (cfg.audit.carleman_ratio) {
            AlphaRegime regime = AlphaRegime::Interior;
            if (cfg.audit.regime == "zero") regime = AlphaRegime::Zero;
            else if (cfg.audit.regime == "one") regime = AlphaRegime::One;
            else if (cfg.audit.regime == "auto") {
                if (cfg.physics.alpha == 0.0) regime = AlphaRegime::Zero;
                else if (cfg.physics.alpha == 1.0) regime = AlphaRegime::One;
            }
            const double ia = std::max(cfg.sets.omega_a, cfg.sets.obs_a);
            const double ib = std::min(cfg.sets.omega_b, cfg.sets.obs_b);
            IndicatorMask omega0 = IndicatorMask::build(
                prob.grid, ia + 0.1 * (ib - ia), ib - 0.1 * (ib - ia));
            std::mt19937_64 rng(cfg.sentinel.rng_seed);
            std::string csv = "draw,lhs,rhs,ratio,overflow\n";
            for (int d = 0; d < 20; ++d) {
                std::vector<double> z0 = draw_unit_perturbation(prob.grid, rng);
                std::vector<double> t0 = draw_unit_perturbation(prob.grid, rng);
                try {
                    CarlemanFunctionalReport cr = carleman_ratio(
                        regime, z0, t0, carleman.weights, prob.grid, prob.tg,
                        prob.params, omega0);
                    csv += std::to_string(d) + "," + format_g17(cr.lhs) + "," +
                           format_g17(cr.rhs) + "," + format_g17(cr.ratio) +
                           "," + (cr.overflow ? "1" : "0") + "\n";
                } catch (const DegenerateObservation&) {
                    csv += std::to_string(d) + ",nan,nan,nan,degenerate\n";
                    code = std::max(code, static_cast<int>(kExitDegenerate));
                }
            }
            write_text_file(pt.dir + "/carleman_ratios.csv", csv);
        }
        if (cfg.audit.observability) {
            ObservabilityEstimate est = estimate_observability(
                prob.omega, carleman.weights, prob.grid, prob.tg, prob.params,
                cfg.audit.mu_list, cfg.audit.subspace_dim);
            std::string csv = "mu,c_obs\n";
            for (std::size_t i = 0; i < est.mu.size(); ++i) {
                csv += format_g17(est.mu[i]) + "," + format_g17(est.c_obs[i]) +
                       "\n";
            }
            write_text_file(pt.dir + "/observability_curve.csv", csv);
            report["observability"] = {{"basis_dim", est.basis_dim},
                                       {"dominant_value", est.dominant_value}};
        }
        write_text_file(pt.dir + "/audit_report.json", report.dump(2) + "\n");
        write_manifest(pt.dir, "audit", pt.cfg);
        return code;
    });
}

} // namespace ksi
