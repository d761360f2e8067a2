#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksinsense/config.hpp"

namespace ksi {

/// Exit codes shared by the drivers and the CLI.
enum ExitCode {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitNotConverged = 2,
    kExitDegenerate = 3,
};

struct RunOptions {
    std::string out_dir;  ///< overrides config output.dir when nonempty
    std::optional<std::uint64_t> seed;
    /// Sweep values per parameter; supported keys: "epsilon", "alpha".
    std::map<std::string, std::vector<double>> sweeps;
    /// For cmd_verify: directory of a prior cmd_control run (empty =
    /// end-to-end).
    std::string from_dir;
    int max_threads = 0;  ///< 0 = KS_INSENSE_THREADS or hardware default
};

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
int cmd_control(const ExperimentConfig& cfg, const RunOptions& opt);
int cmd_verify(const ExperimentConfig& cfg, const RunOptions& opt);
int cmd_audit(const ExperimentConfig& cfg, const RunOptions& opt);

} // namespace ksi
