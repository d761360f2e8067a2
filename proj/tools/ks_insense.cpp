#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ksinsense/experiments.hpp"

namespace {

/// Parse "epsilon=1e-2,1e-4,1e-6" into the sweep map.
void parse_sweep(const std::string& spec,
                 std::map<std::string, std::vector<double>>& sweeps) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw ksi::ConfigError("--sweep expects <param>=<v1,v2,...>");
    }
    const std::string key = spec.substr(0, eq);
    std::vector<double> values;
    std::stringstream ss(spec.substr(eq + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ksi::ConfigError("--sweep: bad value '" + tok + "'");
        }
    }
    if (values.empty()) throw ksi::ConfigError("--sweep: no values given");
    sweeps[key] = values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Insensitizing-control toolkit for the stabilized "
                 "Kuramoto-Sivashinsky system"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string from_dir;
    std::string sweep_spec;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--sweep", sweep_spec,
                        "sweep spec, e.g. epsilon=1e-2,1e-4,1e-6");
        cmd->add_option("--seed", seed, "rng seed override")
            ->each([&](const std::string&) { seed_set = true; });
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run the forward (or cascade) solver");
    CLI::App* control = app.add_subcommand("control", "compute insensitizing controls via penalized HUM");
    CLI::App* verify = app.add_subcommand("verify", "verify the insensitivity condition");
    CLI::App* audit = app.add_subcommand("audit", "run the Carleman weight and observability audits");
    for (CLI::App* cmd : {simulate, control, verify, audit}) add_common(cmd);
    verify->add_option("--from", from_dir,
                       "directory of a prior 'control' run to verify");

    CLI11_PARSE(app, argc, argv);

    try {
        ksi::ExperimentConfig cfg = ksi::load_config(config_path);
        ksi::RunOptions opt;
        opt.out_dir = out_dir;
        opt.from_dir = from_dir;
        if (seed_set) {
            opt.seed = seed;
            cfg.sentinel.rng_seed = seed;
        }
        if (!sweep_spec.empty()) parse_sweep(sweep_spec, opt.sweeps);

        if (simulate->parsed()) return ksi::cmd_simulate(cfg, opt);
        if (control->parsed()) return ksi::cmd_control(cfg, opt);
        if (verify->parsed()) return ksi::cmd_verify(cfg, opt);
        if (audit->parsed()) return ksi::cmd_audit(cfg, opt);
        return ksi::kExitConfigError;
    } catch (const ksi::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return ksi::kExitConfigError;
    } catch (const ksi::SingularMatrix& e) {
        std::cerr << e.what() << "\n";
        return ksi::kExitDegenerate;
    } catch (const ksi::DegenerateObservation& e) {
        std::cerr << e.what() << "\n";
        return ksi::kExitDegenerate;
    } catch (const ksi::Error& e) {
        std::cerr << e.what() << "\n";
        return ksi::kExitDegenerate;
    }
}
