#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kspp/scenario.hpp"

namespace {
constexpr const char* kVersion = "1.0.0";
}

int main(int argc, char** argv) {
    CLI::App app{"Spectral Keller-Segel simulation and verification runner"};
    app.require_subcommand(1);

    std::string config_path;
    kspp::RunOptions options;
    std::uint64_t seed = 0;
    bool strict = false, warn = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "scenario config (json)")->required();
        cmd->add_option("--out", options.out_dir, "report output directory")
            ->default_val("reports");
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--threads", options.threads, "worker thread count (0 = default)");
        auto* s = cmd->add_flag("--strict", strict, "fail hard on smallness violations");
        cmd->add_flag("--warn", warn, "log smallness violations and continue")->excludes(s);
    };

    CLI::App* run = app.add_subcommand("run", "execute every experiment in the config");
    add_common(run);
    CLI::App* verify = app.add_subcommand("verify", "run only the semigroup estimate checks");
    add_common(verify);
    CLI::App* version = app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (version->parsed()) {
        std::cout << "kspp " << kVersion << "\n";
        return 0;
    }

    for (auto* cmd : {run, verify}) {
        if (!cmd->parsed()) continue;
        if (cmd->count("--seed") > 0) options.seed = seed;
        if (strict) options.smallness = kspp::SolverConfig::Mode::Strict;
        if (warn) options.smallness = kspp::SolverConfig::Mode::Warn;
        options.estimates_only = (cmd == verify);
        return kspp::run_scenario(config_path, options);
    }
    return 2;
}
