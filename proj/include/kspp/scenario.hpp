#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kspp/mild_solver.hpp"

namespace kspp {

struct RunOptions {
    std::string out_dir = "reports";
    std::optional<std::uint64_t> seed;                // overrides the config seed
    std::optional<SolverConfig::Mode> smallness;      // overrides the config mode
    int threads = 0;                                  // 0 keeps the runtime default
    bool estimates_only = false;                      // `verify` subcommand
};

/// Execute the experiments of a scenario config in order, writing
/// reports/<name>/*.json and *.csv. Returns the process exit status:
/// 0 all gated checks passed, 1 a gated check failed or a module error
/// surfaced, 2 the config could not be read.
int run_scenario(const std::string& config_path, const RunOptions& options);

}  // namespace kspp
