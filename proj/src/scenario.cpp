#include "kspp/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kspp/stability.hpp"
#include "kspp/threading.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace kspp {

namespace {

template <typename T>
T need(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigParseError("missing key: " + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigParseError("bad value for key: " + key);
    }
}

template <typename T>
T opt(const json& j, const std::string& key, T def) {
    if (!j.is_object() || !j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigParseError("bad value for key: " + key);
    }
}

ScalarField resolve_profile(const DomainPtr& d, const std::string& name) {
    constexpr double pi = std::numbers::pi;
    const auto& L = d->lengths();
    if (name == "constant") return ScalarField(d, 1.0);
    if (name == "cos_x")
        return ScalarField::from_function(
            d, [&](const auto& x) { return std::cos(pi * x[0] / L[0]); });
    if (name == "cos_y") {
        if (d->dim() < 2) throw ConfigParseError("profile cos_y wants a 2D+ domain");
        return ScalarField::from_function(
            d, [&](const auto& x) { return std::cos(pi * x[1] / L[1]); });
    }
    if (name == "cos_x_cos_y") {
        if (d->dim() < 2) throw ConfigParseError("profile cos_x_cos_y wants a 2D+ domain");
        return ScalarField::from_function(d, [&](const auto& x) {
            return std::cos(pi * x[0] / L[0]) * std::cos(pi * x[1] / L[1]);
        });
    }
    if (name.rfind("file:", 0) == 0) {
        ScalarField f = load_binary(name.substr(5));
        if (!f.domain()->same_as(*d))
            throw ConfigParseError("field file does not match the scenario domain: " + name);
        return ScalarField(d, f.values());
    }
    throw ConfigParseError("unknown profile: " + name);
}

// sum of amplitude * profile entries
ScalarField build_field(const DomainPtr& d, const json& arr, const std::string& key) {
    ScalarField out(d);
    if (arr.is_null()) return out;
    if (!arr.is_array()) throw ConfigParseError("bad value for key: " + key);
    for (const auto& e : arr) {
        const auto name = need<std::string>(e, "profile");
        const double amp = need<double>(e, "amplitude");
        out += amp * resolve_profile(d, name);
    }
    return out;
}

SignalSpec build_signal(const DomainPtr& d, const json& j, const std::string& key) {
    SignalSpec s;
    if (j.is_null()) return s;
    if (j.contains("ap")) {
        for (const auto& e : j.at("ap")) {
            Sinusoid tone{need<double>(e, "frequency"), need<double>(e, "amplitude"),
                          opt<double>(e, "phase", 0.0),
                          resolve_profile(d, need<std::string>(e, "profile"))};
            s.ap.push_back(std::move(tone));
        }
    }
    if (j.contains("tail")) {
        const json& t = j.at("tail");
        const auto kind = opt<std::string>(t, "kind", "none");
        if (kind == "none") {
            s.tail.kind = TailKind::None;
        } else if (kind == "reciprocal") {
            s.tail.kind = TailKind::Reciprocal;
            s.tail.c = need<double>(t, "c");
            s.tail.profile = resolve_profile(d, need<std::string>(t, "profile"));
        } else if (kind == "exponential") {
            s.tail.kind = TailKind::Exponential;
            s.tail.c = need<double>(t, "c");
            s.tail.beta = need<double>(t, "beta");
            s.tail.profile = resolve_profile(d, need<std::string>(t, "profile"));
        } else {
            throw ConfigParseError("bad value for key: " + key + ".tail.kind");
        }
    }
    return s;
}

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    DomainPtr domain;
    double p = 4.0;
    ScalarField u0, v0;
    ForcingSpec forcing;
    SolverConfig solver;
    std::vector<std::string> experiments;
    // estimates
    double q = 2.0;
    int samples = 64;
    // aap
    double aap_epsilon = 0.05;
    double aap_transient_factor = 5.0;
    // stability
    ScalarField du0, dv0;
    std::optional<double> stability_t_end;
    // gronwall
    std::vector<double> sigma_fractions{0.25, 0.5, 0.75};
    double gronwall_t_max = 40.0;
    int gronwall_points = 41;
    int export_fields_every = 0;

    Scenario(ScalarField u, ScalarField v, ScalarField du, ScalarField dv, ForcingSpec f)
        : u0(std::move(u)), v0(std::move(v)), forcing(std::move(f)), du0(std::move(du)),
          dv0(std::move(dv)) {}
};

Scenario parse_scenario(const json& j) {
    if (need<int>(j, "schema") != 1) throw ConfigParseError("unsupported schema version");

    const json dj = need<json>(j, "domain");
    auto lengths = need<std::vector<double>>(dj, "lengths");
    auto resolution = need<std::vector<int>>(dj, "resolution");
    DomainPtr domain;
    try {
        domain = assemble_domain(lengths, resolution);
    } catch (const Error& e) {
        throw ConfigParseError(std::string("bad domain: ") + e.what());
    }

    const json& init = opt<json>(j, "initial", json::object());
    ScalarField u0 = build_field(domain, opt<json>(init, "u0", json()), "initial.u0");
    ScalarField v0 = build_field(domain, opt<json>(init, "v0", json()), "initial.v0");

    const json& fj = opt<json>(j, "forcing", json::object());
    const bool mean_zero_g = opt<bool>(fj, "mean_zero_g", true);
    ForcingSpec forcing =
        ForcingSpec::create(domain, build_signal(domain, opt<json>(fj, "g", json()), "forcing.g"),
                            build_signal(domain, opt<json>(fj, "h", json()), "forcing.h"),
                            mean_zero_g);

    const json& sj = opt<json>(j, "stability", json::object());
    ScalarField du0 =
        build_field(domain, opt<json>(sj, "perturbation_u0", json()), "stability.perturbation_u0");
    ScalarField dv0 =
        build_field(domain, opt<json>(sj, "perturbation_v0", json()), "stability.perturbation_v0");

    Scenario sc(std::move(u0), std::move(v0), std::move(du0), std::move(dv0), std::move(forcing));
    sc.domain = domain;
    sc.name = need<std::string>(j, "name");
    sc.seed = opt<std::uint64_t>(j, "seed", 0);
    sc.p = opt<double>(j, "p", 4.0);
    if (sj.contains("t_end")) sc.stability_t_end = need<double>(sj, "t_end");

    const json& so = opt<json>(j, "solver", json::object());
    sc.solver.p = sc.p;
    sc.solver.t_end = opt<double>(so, "t_end", 40.0 / domain->lambda1());
    sc.solver.dt = opt<double>(so, "dt", 0.01);
    sc.solver.tolerance = opt<double>(so, "tolerance", 1e-12);
    sc.solver.max_iterations = opt<int>(so, "max_iterations", 50);
    const auto mode = opt<std::string>(so, "smallness", "strict");
    if (mode == "strict")
        sc.solver.smallness = SolverConfig::Mode::Strict;
    else if (mode == "warn")
        sc.solver.smallness = SolverConfig::Mode::Warn;
    else
        throw ConfigParseError("bad value for key: solver.smallness");

    const json& ej = opt<json>(j, "estimates", json::object());
    sc.q = opt<double>(ej, "q", 2.0);
    sc.samples = opt<int>(ej, "samples", 64);

    const json& aj = opt<json>(j, "aap", json::object());
    sc.aap_epsilon = opt<double>(aj, "epsilon", 0.05);
    sc.aap_transient_factor = opt<double>(aj, "transient_factor", 5.0);

    const json& gj = opt<json>(j, "gronwall", json::object());
    sc.sigma_fractions =
        opt<std::vector<double>>(gj, "sigma_fractions", std::vector<double>{0.25, 0.5, 0.75});
    sc.gronwall_t_max = opt<double>(gj, "t_max", 40.0);
    sc.gronwall_points = opt<int>(gj, "points", 41);

    sc.experiments = need<std::vector<std::string>>(j, "experiments");
    if (sc.experiments.empty()) throw ConfigParseError("experiments list is empty");
    sc.export_fields_every = opt<int>(j, "export_fields_every", 0);
    return sc;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << text << "\n";
}

struct Runner {
    Scenario& sc;
    fs::path out;
    bool all_pass = true;

    // memoized stages
    std::optional<std::vector<EstimateReport>> estimates;
    std::optional<SolverConstants> constants;
    std::optional<TrajectoryState> trajectory;
    std::optional<PicardDiagnostics> solve_diag;

    const std::vector<EstimateReport>& get_estimates() {
        if (!estimates) {
            std::vector<EstimateReport> reps;
            for (auto kind :
                 {EstimateKind::DecayMeanZero, EstimateKind::GradientSmoothing,
                  EstimateKind::GradientToGradient, EstimateKind::DivergenceSmoothing})
                reps.push_back(
                    verify_estimate(sc.domain, kind, sc.p, sc.q, sc.samples, {}, sc.seed));
            estimates = std::move(reps);
        }
        return *estimates;
    }

    const SolverConstants& get_constants() {
        if (!constants) constants = compute_constants(sc.domain, sc.p, get_estimates());
        return *constants;
    }

    void ensure_solved() {
        if (trajectory) return;
        auto [traj, diag] = picard_solve(sc.u0, sc.v0, sc.forcing, sc.solver, get_constants());
        trajectory = std::move(traj);
        solve_diag = std::move(diag);
    }

    void run_verify_estimates() {
        ordered_json arr = ordered_json::array();
        bool pass = true;
        for (const EstimateReport& r : get_estimates()) {
            arr.push_back(ordered_json::parse(r.to_json()));
            pass = pass && r.pass;
        }
        write_file(out / "estimate_report.json", arr.dump(2));
        all_pass = all_pass && pass;
    }

    void run_solve() {
        ensure_solved();
        write_file(out / "solve_report.json", solve_diag->to_json());
        std::ostringstream csv;
        write_trajectory_csv(*trajectory, sc.p, csv);
        write_file(out / "trajectory.csv", csv.str());
        if (sc.export_fields_every > 0) {
            fs::create_directories(out / "fields");
            for (std::size_t n = 0; n < trajectory->nodes();
                 n += static_cast<std::size_t>(sc.export_fields_every)) {
                std::ostringstream stem;
                stem << "u_" << n << ".bin";
                save_binary(trajectory->u[n], (out / "fields" / stem.str()).string());
            }
        }
        all_pass = all_pass && solve_diag->converged && solve_diag->gate.ok;
    }

    void run_aap_check() {
        ensure_solved();
        const double cut = sc.aap_transient_factor / sc.domain->lambda1();
        AapReport rep = verify_aap(norm_series(*trajectory, sc.p), sc.aap_epsilon, cut);
        write_file(out / "aap_report.json", rep.to_json());
        all_pass = all_pass && rep.is_aap;
    }

    void run_stability() {
        SolverConfig cfg = sc.solver;
        if (sc.stability_t_end) cfg.t_end = *sc.stability_t_end;
        StabilityReport rep = stability_experiment(sc.u0, sc.v0, sc.forcing, sc.du0, sc.dv0,
                                                   cfg, get_constants());
        write_file(out / "stability_report.json", rep.to_json());
        std::ostringstream csv;
        csv << "t,distance\n";
        csv.precision(17);
        for (std::size_t i = 0; i < rep.times.size(); ++i)
            csv << rep.times[i] << "," << rep.distances[i] << "\n";
        write_file(out / "distance.csv", csv.str());
        all_pass = all_pass && rep.pass && !rep.degenerate;
    }

    void run_gronwall() {
        std::vector<double> grid(sc.gronwall_points);
        for (int i = 0; i < sc.gronwall_points; ++i)
            grid[i] = sc.gronwall_t_max * i / std::max(1, sc.gronwall_points - 1);
        ordered_json arr = ordered_json::array();
        bool pass = true;
        for (double frac : sc.sigma_fractions) {
            GronwallResult res = gronwall_integrals(sc.domain->lambda1(),
                                                    frac * sc.domain->lambda1(),
                                                    sc.domain->dim(), sc.p, grid);
            arr.push_back(ordered_json::parse(res.to_json()));
            pass = pass && res.pass;
        }
        write_file(out / "gronwall_report.json", arr.dump(2));
        all_pass = all_pass && pass;
    }
};

}  // namespace

int run_scenario(const std::string& config_path, const RunOptions& options) {
    json config;
    {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "config error: cannot open " << config_path << "\n";
            return 2;
        }
        try {
            is >> config;
        } catch (const json::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }

    if (options.threads > 0) threading::set_threads(options.threads);

    std::optional<Scenario> sc;
    try {
        sc = parse_scenario(config);
    } catch (const ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (options.seed) sc->seed = *options.seed;
    if (options.smallness) sc->solver.smallness = *options.smallness;

    Runner runner{*sc, fs::path(options.out_dir) / sc->name};
    fs::create_directories(runner.out);

    const std::vector<std::string> experiments =
        options.estimates_only ? std::vector<std::string>{"verify_estimates"} : sc->experiments;

    for (const std::string& step : experiments) {
        try {
            if (step == "verify_estimates")
                runner.run_verify_estimates();
            else if (step == "solve")
                runner.run_solve();
            else if (step == "aap_check")
                runner.run_aap_check();
            else if (step == "stability")
                runner.run_stability();
            else if (step == "gronwall")
                runner.run_gronwall();
            else {
                std::cerr << "config error: unknown experiment: " << step << "\n";
                return 2;
            }
            std::cout << "[" << sc->name << "] " << step << " done\n";
        } catch (const Error& e) {
            std::cerr << "[" << sc->name << "] " << step << " failed: " << e.what() << "\n";
            return 1;
        }
    }
    return runner.all_pass ? 0 : 1;
}

}  // namespace kspp
