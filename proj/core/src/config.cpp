#include "ksinsense/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ksinsense/io.hpp"

namespace ksi {

using nlohmann::json;

namespace {

void fail(const std::string& constraint) {
    throw ConfigError("config: " + constraint);
}

void check_interval(double a, double b, const std::string& name) {
    if (!(0.0 < a && a < b && b < 1.0)) {
        fail(name + " must satisfy 0 < a < b < 1");
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void ExperimentConfig::validate() const {
    if (grid.n_cells < 9) fail("grid.N must be >= 9 (at least 8 interior nodes)");
    if (grid.n_steps < 4) fail("grid.M must be >= 4");
    if (!(grid.horizon > 0.0)) fail("grid.T must be > 0");

    if (!(physics.gamma > 0.0)) fail("physics.gamma must be > 0");
    if (!(physics.alpha >= 0.0 && physics.alpha <= 1.0))
        fail("physics.alpha must lie in [0,1]");

    check_interval(sets.omega_a, sets.omega_b, "sets.omega");
    check_interval(sets.obs_a, sets.obs_b, "sets.O");
    if (!(std::max(sets.omega_a, sets.obs_a) <
          std::min(sets.omega_b, sets.obs_b))) {
        fail("sets.omega and sets.O must intersect (standing hypothesis of the "
             "control problem)");
    }
    if (sets.smoothing != "sharp" && sets.smoothing != "linear-ramp")
        fail("sets.smoothing must be 'sharp' or 'linear-ramp'");

    if (!(carleman.m > 0.0)) fail("carleman.m must be > 0");
    if (!carleman.k_auto && !(carleman.k > carleman.m))
        fail("carleman.k must exceed carleman.m (or be \"auto\")");
    if (!(carleman.lambda > 1.0)) fail("carleman.lambda must be > 1");
    if (!(carleman.s > 0.0)) fail("carleman.s must be > 0");

    if (!(hum.epsilon > 0.0)) fail("hum.epsilon must be > 0");
    if (!(hum.cg_tol > 0.0 && hum.cg_tol < 1.0))
        fail("hum.cg_tol must lie in (0,1)");
    if (hum.cg_max_iter < 1) fail("hum.cg_max_iter must be >= 1");

    if (sentinel.tau_list.empty()) fail("sentinel.tau_list must be nonempty");
    for (double tau : sentinel.tau_list) {
        if (!(tau != 0.0) || std::abs(tau) > 0.1)
            fail("sentinel.tau_list values must be nonzero with |tau| <= 0.1");
    }
    if (sentinel.n_perturbations < 1)
        fail("sentinel.n_perturbations must be >= 1");

    if (sources.kind != "zero" && sources.kind != "gaussian-bump" &&
        sources.kind != "file")
        fail("sources.kind must be zero | gaussian-bump | file");
    if (sources.kind == "file" && sources.file.empty())
        fail("sources.file path required when sources.kind == 'file'");

    if (simulate.scheme != "implicit-euler" &&
        simulate.scheme != "crank-nicolson")
        fail("simulate.scheme must be implicit-euler | crank-nicolson");

    if (audit.p < 2) fail("audit.p must be >= 2");
    for (double b : audit.b_list) {
        if (!(b > 0.0)) fail("audit.b_list entries must be > 0");
    }
    for (double mu : audit.mu_list) {
        if (!(mu > 0.0)) fail("audit.mu_list entries must be > 0");
    }
    if (audit.regime != "auto" && audit.regime != "interior" &&
        audit.regime != "zero" && audit.regime != "one")
        fail("audit.regime must be auto | interior | zero | one");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("grid")) {
            const json& g = j["grid"];
            read_if(g, "N", cfg.grid.n_cells);
            read_if(g, "M", cfg.grid.n_steps);
            read_if(g, "T", cfg.grid.horizon);
        }
        if (j.contains("physics")) {
            const json& g = j["physics"];
            read_if(g, "gamma", cfg.physics.gamma);
            read_if(g, "beta", cfg.physics.beta);
            read_if(g, "alpha", cfg.physics.alpha);
        }
        if (j.contains("sets")) {
            const json& g = j["sets"];
            if (g.contains("omega")) {
                cfg.sets.omega_a = g["omega"].at(0).get<double>();
                cfg.sets.omega_b = g["omega"].at(1).get<double>();
            }
            if (g.contains("O")) {
                cfg.sets.obs_a = g["O"].at(0).get<double>();
                cfg.sets.obs_b = g["O"].at(1).get<double>();
            }
            read_if(g, "smoothing", cfg.sets.smoothing);
        }
        if (j.contains("carleman")) {
            const json& g = j["carleman"];
            read_if(g, "m", cfg.carleman.m);
            if (g.contains("k")) {
                if (g["k"].is_string()) {
                    if (g["k"].get<std::string>() != "auto") {
                        fail("carleman.k must be a number or \"auto\"");
                    }
                    cfg.carleman.k_auto = true;
                } else {
                    cfg.carleman.k = g["k"].get<double>();
                    cfg.carleman.k_auto = false;
                }
            }
            read_if(g, "s", cfg.carleman.s);
            read_if(g, "lambda", cfg.carleman.lambda);
        }
        if (j.contains("hum")) {
            const json& g = j["hum"];
            read_if(g, "epsilon", cfg.hum.epsilon);
            read_if(g, "cg_tol", cfg.hum.cg_tol);
            read_if(g, "cg_max_iter", cfg.hum.cg_max_iter);
        }
        if (j.contains("sentinel")) {
            const json& g = j["sentinel"];
            read_if(g, "tau_list", cfg.sentinel.tau_list);
            read_if(g, "n_perturbations", cfg.sentinel.n_perturbations);
            read_if(g, "rng_seed", cfg.sentinel.rng_seed);
        }
        if (j.contains("sources")) {
            const json& g = j["sources"];
            read_if(g, "kind", cfg.sources.kind);
            if (g.contains("params")) {
                const json& p = g["params"];
                read_if(p, "amplitude", cfg.sources.amplitude);
                read_if(p, "x_c", cfg.sources.x_c);
                read_if(p, "w_x", cfg.sources.w_x);
                read_if(p, "t_c", cfg.sources.t_c);
                read_if(p, "w_t", cfg.sources.w_t);
                read_if(p, "file", cfg.sources.file);
            }
        }
        if (j.contains("output")) {
            const json& g = j["output"];
            read_if(g, "dir", cfg.output.dir);
            read_if(g, "formats", cfg.output.formats);
        }
        if (j.contains("simulate")) {
            const json& g = j["simulate"];
            read_if(g, "cascade", cfg.simulate.cascade);
            read_if(g, "scheme", cfg.simulate.scheme);
        }
        if (j.contains("audit")) {
            const json& g = j["audit"];
            read_if(g, "weights", cfg.audit.weights);
            read_if(g, "b_list", cfg.audit.b_list);
            read_if(g, "good_sign", cfg.audit.good_sign);
            read_if(g, "p", cfg.audit.p);
            read_if(g, "admissibility", cfg.audit.admissibility);
            read_if(g, "cap", cfg.audit.cap);
            read_if(g, "carleman_ratio", cfg.audit.carleman_ratio);
            read_if(g, "regime", cfg.audit.regime);
            read_if(g, "observability", cfg.audit.observability);
            read_if(g, "mu_list", cfg.audit.mu_list);
            read_if(g, "subspace_dim", cfg.audit.subspace_dim);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: malformed field: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

std::string canonical_json(const ExperimentConfig& cfg) {
    json j;
    j["grid"] = {{"N", cfg.grid.n_cells},
                 {"M", cfg.grid.n_steps},
                 {"T", cfg.grid.horizon}};
    j["physics"] = {{"gamma", cfg.physics.gamma},
                    {"beta", cfg.physics.beta},
                    {"alpha", cfg.physics.alpha}};
    j["sets"] = {{"omega", {cfg.sets.omega_a, cfg.sets.omega_b}},
                 {"O", {cfg.sets.obs_a, cfg.sets.obs_b}},
                 {"smoothing", cfg.sets.smoothing}};
    if (cfg.carleman.k_auto) {
        j["carleman"] = {{"m", cfg.carleman.m},
                         {"k", "auto"},
                         {"s", cfg.carleman.s},
                         {"lambda", cfg.carleman.lambda}};
    } else {
        j["carleman"] = {{"m", cfg.carleman.m},
                         {"k", cfg.carleman.k},
                         {"s", cfg.carleman.s},
                         {"lambda", cfg.carleman.lambda}};
    }
    j["hum"] = {{"epsilon", cfg.hum.epsilon},
                {"cg_tol", cfg.hum.cg_tol},
                {"cg_max_iter", cfg.hum.cg_max_iter}};
    j["sentinel"] = {{"tau_list", cfg.sentinel.tau_list},
                     {"n_perturbations", cfg.sentinel.n_perturbations},
                     {"rng_seed", cfg.sentinel.rng_seed}};
    j["sources"] = {{"kind", cfg.sources.kind},
                    {"params",
                     {{"amplitude", cfg.sources.amplitude},
                      {"x_c", cfg.sources.x_c},
                      {"w_x", cfg.sources.w_x},
                      {"t_c", cfg.sources.t_c},
                      {"w_t", cfg.sources.w_t},
                      {"file", cfg.sources.file}}}};
    j["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
    j["simulate"] = {{"cascade", cfg.simulate.cascade},
                     {"scheme", cfg.simulate.scheme}};
    j["audit"] = {{"weights", cfg.audit.weights},
                  {"b_list", cfg.audit.b_list},
                  {"good_sign", cfg.audit.good_sign},
                  {"p", cfg.audit.p},
                  {"admissibility", cfg.audit.admissibility},
                  {"cap", cfg.audit.cap},
                  {"carleman_ratio", cfg.audit.carleman_ratio},
                  {"regime", cfg.audit.regime},
                  {"observability", cfg.audit.observability},
                  {"mu_list", cfg.audit.mu_list},
                  {"subspace_dim", cfg.audit.subspace_dim}};
    return j.dump(2) + "\n";
}

Problem build_problem(const ExperimentConfig& cfg) {
    cfg.validate();
    Grid grid(cfg.grid.n_cells);
    TimeGrid tg(cfg.grid.horizon, cfg.grid.n_steps);
    PhysicsParams params{cfg.physics.gamma, cfg.physics.beta, cfg.physics.alpha};
    const auto smoothing = cfg.sets.smoothing == "sharp"
                               ? IndicatorMask::Smoothing::Sharp
                               : IndicatorMask::Smoothing::LinearRamp;
    IndicatorMask omega =
        IndicatorMask::build(grid, cfg.sets.omega_a, cfg.sets.omega_b, smoothing);
    IndicatorMask obs =
        IndicatorMask::build(grid, cfg.sets.obs_a, cfg.sets.obs_b, smoothing);

    Problem prob{std::move(grid), tg, params, std::move(omega), std::move(obs),
                 std::nullopt, std::nullopt};

    if (cfg.sources.kind == "gaussian-bump") {
        const double t_c =
            cfg.sources.t_c < 0.0 ? 0.5 * tg.T() : cfg.sources.t_c;
        const double w_t = cfg.sources.w_t < 0.0 ? tg.T() / 8.0 : cfg.sources.w_t;
        SpaceTimeField f = SpaceTimeField::zeros(prob.grid, tg);
        for (int level = 0; level <= tg.n_steps(); ++level) {
            const double t = tg.t(level);
            for (int i = 0; i < prob.grid.n_interior(); ++i) {
                const double x = prob.grid.x_interior(i);
                const double ex =
                    -((x - cfg.sources.x_c) * (x - cfg.sources.x_c) /
                          (cfg.sources.w_x * cfg.sources.w_x) +
                      (t - t_c) * (t - t_c) / (w_t * w_t));
                f.at(level, i) = cfg.sources.amplitude * std::exp(ex);
            }
        }
        prob.xi1 = f;
        prob.xi2 = std::move(f);
    } else if (cfg.sources.kind == "file") {
        const std::string text = read_text_file(cfg.sources.file);
        std::vector<SpaceTimeField> fields =
            parse_fields_csv(text, prob.grid, tg, {"xi1", "xi2"});
        prob.xi1 = std::move(fields[0]);
        prob.xi2 = std::move(fields[1]);
    }
    return prob;
}

CarlemanSetup build_carleman(const ExperimentConfig& cfg, const Grid& grid,
                             const TimeGrid& tg) {
    // omega_0 lives strictly inside omega intersect O.
    const double ia = std::max(cfg.sets.omega_a, cfg.sets.obs_a);
    const double ib = std::min(cfg.sets.omega_b, cfg.sets.obs_b);
    const double margin = 0.1 * (ib - ia);
    NuFunction nu = build_nu(grid, ia + margin, ib - margin);

    CarlemanParams params;
    params.m = cfg.carleman.m;
    params.s = cfg.carleman.s;
    params.lambda = cfg.carleman.lambda;
    double k_min = 0.0;
    if (cfg.carleman.k_auto) {
        k_min = search_k(nu, params.m, params.lambda, std::max(cfg.audit.p, 3));
        params.k = k_min;
    } else {
        params.k = cfg.carleman.k;
    }
    WeightSet ws = build_weights(nu, params, grid, tg);
    return CarlemanSetup{std::move(nu), params, std::move(ws), k_min};
}

} // namespace ksi
