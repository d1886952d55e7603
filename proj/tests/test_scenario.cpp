#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kspp/scenario.hpp"

using namespace kspp;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "schema": 1,
  "name": "unit",
  "seed": 3,
  "domain": {"lengths": [3.141592653589793, 3.141592653589793], "resolution": [16, 16]},
  "p": 4.0,
  "initial": {"u0": [], "v0": []},
  "forcing": {
    "g": {"ap": [{"frequency": 1.0, "amplitude": 0.001, "phase": 0.0, "profile": "cos_x"}],
           "tail": {"kind": "none"}},
    "h": {"ap": [], "tail": {"kind": "none"}},
    "mean_zero_g": true
  },
  "solver": {"t_end": 11.0, "dt": 0.01, "tolerance": 1e-12, "max_iterations": 50, "smallness": "strict"},
  "estimates": {"q": 2.0, "samples": 8},
  "experiments": ["solve", "aap_check"],
  "aap": {"epsilon": 0.05, "transient_factor": 5.0}
})";

// estimate verification needs the acceptance-scale resolution for its
// small-t slope window; horizon does not matter for it
const char* kVerifyConfig = R"({
  "schema": 1,
  "name": "verify_unit",
  "seed": 5,
  "domain": {"lengths": [3.141592653589793, 3.141592653589793], "resolution": [32, 32]},
  "p": 4.0,
  "initial": {"u0": [], "v0": []},
  "forcing": {"g": {"ap": [], "tail": {"kind": "none"}}, "h": {"ap": [], "tail": {"kind": "none"}}, "mean_zero_g": true},
  "estimates": {"q": 2.0, "samples": 8},
  "experiments": ["verify_estimates"]
})";

fs::path write_config(const std::string& text, const std::string& stem) {
    const fs::path dir = fs::temp_directory_path() / "kspp_scenario_test";
    fs::create_directories(dir);
    const fs::path path = dir / (stem + ".json");
    std::ofstream os(path);
    os << text;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("run_scenario executes the experiment list and writes reports") {
    const fs::path cfg = write_config(kSmallConfig, "small");
    const fs::path out = fs::temp_directory_path() / "kspp_scenario_test" / "out";
    fs::remove_all(out);

    RunOptions opt;
    opt.out_dir = out.string();
    CHECK(run_scenario(cfg.string(), opt) == 0);
    CHECK(fs::exists(out / "unit" / "estimate_report.json"));
    CHECK(fs::exists(out / "unit" / "solve_report.json"));
    CHECK(fs::exists(out / "unit" / "trajectory.csv"));
    CHECK(fs::exists(out / "unit" / "aap_report.json"));

    // repeated runs are byte-identical
    const std::string first = slurp(out / "unit" / "estimate_report.json");
    const std::string traj1 = slurp(out / "unit" / "trajectory.csv");
    CHECK(run_scenario(cfg.string(), opt) == 0);
    CHECK(slurp(out / "unit" / "estimate_report.json") == first);
    CHECK(slurp(out / "unit" / "trajectory.csv") == traj1);
}

TEST_CASE("estimates-only mode runs just the verification") {
    const fs::path cfg = write_config(kSmallConfig, "verify_only");
    const fs::path out = fs::temp_directory_path() / "kspp_scenario_test" / "out2";
    fs::remove_all(out);
    RunOptions opt;
    opt.out_dir = out.string();
    opt.estimates_only = true;
    CHECK(run_scenario(cfg.string(), opt) == 0);
    CHECK(fs::exists(out / "unit" / "estimate_report.json"));
    CHECK_FALSE(fs::exists(out / "unit" / "solve_report.json"));
}

TEST_CASE("missing config exits with the usage code") {
    RunOptions opt;
    CHECK(run_scenario("/nonexistent/config.json", opt) == 2);
}

TEST_CASE("malformed configs name the offending key") {
    RunOptions opt;
    opt.out_dir = (fs::temp_directory_path() / "kspp_scenario_test" / "out3").string();

    std::string no_name(kSmallConfig);
    no_name.replace(no_name.find("\"name\""), 6, "\"renamed\"");
    CHECK(run_scenario(write_config(no_name, "no_name").string(), opt) == 2);

    std::string bad_schema(kSmallConfig);
    bad_schema.replace(bad_schema.find("\"schema\": 1"), 11, "\"schema\": 9");
    CHECK(run_scenario(write_config(bad_schema, "bad_schema").string(), opt) == 2);

    std::string bad_profile(kSmallConfig);
    bad_profile.replace(bad_profile.find("cos_x"), 5, "nosuch");
    CHECK(run_scenario(write_config(bad_profile, "bad_profile").string(), opt) == 2);

    std::string bad_experiment(kSmallConfig);
    bad_experiment.replace(bad_experiment.find("aap_check"), 9, "nosuchexp");
    CHECK(run_scenario(write_config(bad_experiment, "bad_exp").string(), opt) == 2);
}

TEST_CASE("module errors surface as gated failures") {
    // a gronwall step with sigma >= lambda1 violates the rate ordering
    std::string cfg(kSmallConfig);
    cfg.replace(cfg.find("[\"verify_estimates\", \"solve\", \"aap_check\"]"),
                std::string("[\"verify_estimates\", \"solve\", \"aap_check\"]").size(),
                "[\"gronwall\"]");
    cfg.insert(cfg.rfind('}'), R"(, "gronwall": {"sigma_fractions": [1.5], "t_max": 5.0, "points": 6})");
    RunOptions opt;
    opt.out_dir = (fs::temp_directory_path() / "kspp_scenario_test" / "out4").string();
    CHECK(run_scenario(write_config(cfg, "bad_sigma").string(), opt) == 1);
}
