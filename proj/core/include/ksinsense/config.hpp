#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ksinsense/carleman.hpp"
#include "ksinsense/hum.hpp"
#include "ksinsense/sentinel.hpp"

namespace ksi {

/// Flat JSON experiment configuration. Every module invariant is re-checked
/// on load; violations raise ConfigError naming the constraint.
struct ExperimentConfig {
    struct GridSection {
        int n_cells = 64;
        int n_steps = 128;
        double horizon = 1.0;
    } grid;

    struct PhysicsSection {
        double gamma = 1.0;
        double beta = 0.5;
        double alpha = 0.5;
    } physics;

    struct SetsSection {
        double omega_a = 0.3;
        double omega_b = 0.6;
        double obs_a = 0.5;
        double obs_b = 0.8;
        std::string smoothing = "sharp";  // or "linear-ramp"
    } sets;

    struct CarlemanSection {
        double m = 2.0;
        double k = 0.0;      ///< ignored when k_auto
        bool k_auto = true;
        double s = 1.0;
        double lambda = 2.0;
    } carleman;

    struct HumSection {
        double epsilon = 1e-6;
        double cg_tol = 1e-8;
        int cg_max_iter = 500;
    } hum;

    struct SentinelSection {
        std::vector<double> tau_list{1e-2, 5e-3};
        int n_perturbations = 10;
        std::uint64_t rng_seed = 0;
    } sentinel;

    struct SourcesSection {
        std::string kind = "gaussian-bump";  // zero | gaussian-bump | file
        double amplitude = 1.0;
        double x_c = 0.5;
        double w_x = 0.1;
        double t_c = -1.0;  ///< -1 means T/2
        double w_t = -1.0;  ///< -1 means T/8
        std::string file;   ///< CSV t,x,xi1,xi2 when kind == "file"
    } sources;

    struct OutputSection {
        std::string dir = "out";
        std::vector<std::string> formats{"csv", "json"};
    } output;

    struct SimulateSection {
        bool cascade = false;
        std::string scheme = "implicit-euler";  // or "crank-nicolson"
    } simulate;

    struct AuditSection {
        bool weights = true;
        std::vector<double> b_list{3.0, 7.0, 39.0};
        bool good_sign = true;
        int p = 10;
        bool admissibility = true;
        double cap = 1e300;
        bool carleman_ratio = false;
        std::string regime = "auto";  // auto | interior | zero | one
        bool observability = false;
        std::vector<double> mu_list{1e-4, 1e-6, 1e-8};
        int subspace_dim = 0;
    } audit;

    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Deterministic serialization (alphabetical keys); parse_config round-trips.
std::string canonical_json(const ExperimentConfig& cfg);

/// Assembled problem pieces shared by the drivers.
struct Problem {
    Grid grid;
    TimeGrid tg;
    PhysicsParams params;
    IndicatorMask omega;
    IndicatorMask obs;
    std::optional<SpaceTimeField> xi1;
    std::optional<SpaceTimeField> xi2;

    const SpaceTimeField* xi1_ptr() const { return xi1 ? &*xi1 : nullptr; }
    const SpaceTimeField* xi2_ptr() const { return xi2 ? &*xi2 : nullptr; }
};
Problem build_problem(const ExperimentConfig& cfg);

/// Carleman parameter block with k resolved (search_k when k_auto).
struct CarlemanSetup {
    NuFunction nu;
    CarlemanParams params;
    WeightSet weights;
    double k_min = 0.0;
};
CarlemanSetup build_carleman(const ExperimentConfig& cfg, const Grid& grid,
                             const TimeGrid& tg);

} // namespace ksi
