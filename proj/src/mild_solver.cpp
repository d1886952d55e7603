#include "kspp/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "kspp/kernels.hpp"
#include "kspp/threading.hpp"

namespace kspp {

double gamma_function(double x) {
    if (!(x > 0.0) || x > 0.5) throw OutOfRange("gamma_function wants 0 < x <= 1/2");
    return std::tgamma(x);
}

std::size_t SolverConfig::nodes() const {
    if (!(dt > 0.0) || !(tolerance > 0.0)) throw Error("solver config wants dt > 0, tolerance > 0");
    const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
    if (n < 1) throw Error("horizon shorter than one step");
    return n + 1;
}

std::vector<double> SolverConfig::time_grid() const {
    std::vector<double> t(nodes());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<double>(j) * dt;
    return t;
}

// ---------------------------------------------------------------------------
// trajectory measurements
// ---------------------------------------------------------------------------

namespace {

struct NormTriple {
    double u = 0, v = 0, gv = 0;
    double sum() const { return u + v + gv; }
};

NormTriple node_norms(const TrajectoryState& s, std::size_t j, double p) {
    return {lp_norm(s.u[j], 0.5 * p), lp_norm(s.v[j], 0.5 * p), lp_norm(s.grad_v[j], p)};
}

}  // namespace

double x_norm(const TrajectoryState& s, double p) {
    if (s.times.empty()) throw EmptyTrajectory("x_norm of an empty trajectory");
    double sup = 0.0;
    for (std::size_t j = 0; j < s.nodes(); ++j) sup = std::max(sup, node_norms(s, j, p).sum());
    return sup;
}

SampledSignal norm_series(const TrajectoryState& s, double p) {
    if (s.times.empty()) throw EmptyTrajectory("norm_series of an empty trajectory");
    SampledSignal sig;
    sig.t0 = s.times.front();
    sig.dt = s.nodes() > 1 ? s.times[1] - s.times[0] : 0.0;
    sig.values.resize(s.nodes());
    for (std::size_t j = 0; j < s.nodes(); ++j) {
        const NormTriple n = node_norms(s, j, p);
        sig.values[j] = {n.u, n.v, n.gv};
    }
    return sig;
}

std::vector<double> distance_series(const TrajectoryState& a, const TrajectoryState& b, double p) {
    if (a.nodes() != b.nodes()) throw GridMismatch("trajectories live on different time grids");
    std::vector<double> d(a.nodes());
    for (std::size_t j = 0; j < a.nodes(); ++j) {
        ScalarField du = a.u[j] - b.u[j];
        ScalarField dv = a.v[j] - b.v[j];
        VectorField dg = a.grad_v[j];
        dg -= b.grad_v[j];
        d[j] = lp_norm(du, 0.5 * p) + lp_norm(dv, 0.5 * p) + lp_norm(dg, p);
    }
    return d;
}

void write_trajectory_csv(const TrajectoryState& s, double p, std::ostream& os) {
    os << "t,u_norm,v_norm,grad_v_norm,u_mean\n";
    os.precision(17);
    for (std::size_t j = 0; j < s.nodes(); ++j) {
        const NormTriple n = node_norms(s, j, p);
        os << s.times[j] << "," << n.u << "," << n.v << "," << n.gv << "," << mean(s.u[j])
           << "\n";
    }
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

SolverConstants compute_constants(const DomainPtr& domain, double p,
                                  const std::vector<EstimateReport>& reports) {
    const int n = domain->dim();
    if (!(p > std::max(3.0, static_cast<double>(n))))
        throw ExponentRegimeViolation("constants want p > max{3, n}");

    SolverConstants c;
    c.lambda1 = domain->lambda1();
    c.p = p;
    c.n = n;

    bool have[4] = {false, false, false, false};
    for (const EstimateReport& r : reports) {
        if (r.kind == "i") c.k1 = r.k, have[0] = true;
        if (r.kind == "ii") c.k2 = r.k, have[1] = true;
        if (r.kind == "iii") c.k3 = r.k, have[2] = true;
        if (r.kind == "iv") c.k4 = r.k, have[3] = true;
    }
    if (!(have[0] && have[1] && have[2] && have[3]))
        throw MissingReport("constants want estimate reports for all four kinds");

    const double lam = c.lambda1;
    const double gamma_arg = 0.5 - 0.5 * n / p;
    const double gamma = gamma_function(gamma_arg);
    const double tail = std::pow(lam, -0.5 + 0.5 * n / p) * gamma;
    c.C = 1.0 / lam + tail;
    c.C_shift = 1.0 / (lam + 1.0) + tail;

    c.C1 = c.k1 + std::max(c.k1, c.k1 * c.k1 / (lam + 1.0)) + c.k1 * c.k2 * c.C_shift;
    c.C2 = c.k3;
    c.C3 = c.k4 * c.C + c.k1 * c.k4 * c.C / (lam + 1.0) + c.k2 * c.k4 * c.C_shift * c.C;
    c.C4 = c.k1 / lam + std::max(c.k1 * c.k1 / (lam * (lam + 1.0)), c.k1 / (lam + 1.0)) +
           std::max(c.k1 * c.k2 * c.C_shift / lam, c.k2 * c.C_shift);

    c.rho = std::numeric_limits<double>::quiet_NaN();
    c.contraction_bound = std::numeric_limits<double>::quiet_NaN();
    return c;
}

std::string SolverConstants::to_json() const {
    nlohmann::ordered_json j;
    j["lambda1"] = lambda1;
    j["p"] = p;
    j["n"] = n;
    j["k1"] = k1;
    j["k2"] = k2;
    j["k3"] = k3;
    j["k4"] = k4;
    j["C"] = C;
    j["C_shift"] = C_shift;
    j["C1"] = C1;
    j["C2"] = C2;
    j["C3"] = C3;
    j["C4"] = C4;
    if (std::isfinite(rho)) {
        j["rho"] = rho;
        j["contraction_bound"] = contraction_bound;
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// exponential trapezoidal machinery
// ---------------------------------------------------------------------------

namespace {

// a(t+h) = e^{-theta} a(t) + wa s(t) + wb s(t+h), theta = mu h; exact for s
// linear on the step. wa = h f(theta), wb = h g(theta) with
//   f = (1 - e^-x (1+x))/x^2 = sum_j (-1)^j (j+1)/(j+2)! x^j
//   g = (1 - e^-x)/x - f     = sum_j (-1)^j /(j+2)! x^j
void step_weights(double theta, double h, double& decay, double& wa, double& wb) {
    decay = std::exp(-theta);
    if (theta < 0.5) {
        double f = 0.0, g = 0.0;
        double pw = 1.0;        // theta^j
        double fact = 2.0;      // (j+2)!
        double sign = 1.0;
        for (int j = 0;; ++j) {
            f += sign * (j + 1) * pw / fact;
            g += sign * pw / fact;
            if (j == 17) break;
            pw *= theta;
            fact *= (j + 3);
            sign = -sign;
        }
        wa = h * f;
        wb = h * g;
    } else {
        const double f = (1.0 - decay * (1.0 + theta)) / (theta * theta);
        const double e0 = -std::expm1(-theta) / theta;
        wa = h * f;
        wb = h * (e0 - f);
    }
}

struct StepWeights {
    std::vector<double> decay, wa, wb;
};

StepWeights make_weights(const Domain& d, double shift, double h) {
    StepWeights w;
    const std::size_t K = d.size();
    w.decay.resize(K);
    w.wa.resize(K);
    w.wb.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        step_weights((d.eigenvalues()[k] + shift) * h, h, w.decay[k], w.wa[k], w.wb[k]);
    return w;
}

// spatial profiles analyzed once; coefficient evaluation per time is a
// handful of axpys
class CompiledSignal {
  public:
    CompiledSignal(const SignalSpec& s, const DomainPtr& d) : K_(d->size()) {
        for (const auto& tone : s.ap) {
            Tone t;
            t.freq = tone.frequency;
            t.amp = tone.amplitude;
            t.phase = tone.phase;
            t.hat.resize(K_);
            d->analyze(tone.profile.values().data(), t.hat.data(), all_cos());
            tones_.push_back(std::move(t));
        }
        if (s.tail.kind != TailKind::None && s.tail.profile) {
            tail_ = s.tail;
            tail_hat_.resize(K_);
            d->analyze(s.tail.profile->values().data(), tail_hat_.data(), all_cos());
        }
    }

    void accumulate(double t, double* acc) const {
        for (const auto& tn : tones_) {
            const double env = tn.amp * std::sin(tn.freq * t + tn.phase);
            for (std::size_t k = 0; k < K_; ++k) acc[k] += env * tn.hat[k];
        }
        if (!tail_hat_.empty()) {
            const double env = tail_.envelope(t);
            for (std::size_t k = 0; k < K_; ++k) acc[k] += env * tail_hat_[k];
        }
    }

    /// upper bound for |mean| over all times
    double mean_bound() const {
        double b = 0.0;
        for (const auto& tn : tones_) b += std::fabs(tn.amp * tn.hat[0]);
        if (!tail_hat_.empty()) b += std::fabs(tail_.c * tail_hat_[0]);
        return b;
    }

    bool empty() const { return tones_.empty() && tail_hat_.empty(); }

  private:
    struct Tone {
        double freq = 0, amp = 0, phase = 0;
        std::vector<double> hat;
    };
    std::size_t K_;
    std::vector<Tone> tones_;
    TailSpec tail_;
    std::vector<double> tail_hat_;
};

double grid_norm_of(const DomainPtr& d, const double* hat, double p) {
    std::vector<double> grid(d->size());
    d->synthesize(hat, grid.data(), all_cos());
    const double s = kernels::pow_sum_serial(grid.data(), grid.size(), p);
    return std::pow(d->cell_weight() * s, 1.0 / p);
}

double grad_norm_of(const DomainPtr& d, const double* hat, double p) {
    SpectralField f(d, std::vector<double>(hat, hat + d->size()));
    std::vector<std::vector<double>> comps(d->dim());
    std::vector<const double*> ptrs(d->dim());
    for (int a = 0; a < d->dim(); ++a) {
        SpectralField da = derivative(f, a);
        comps[a].resize(d->size());
        d->synthesize(da.coeffs().data(), comps[a].data(), da.parities());
        ptrs[a] = comps[a].data();
    }
    const double s = kernels::vec_pow_sum_serial(ptrs.data(), d->dim(), d->size(), p);
    return std::pow(d->cell_weight() * s, 1.0 / p);
}

void check_uniform_grid(const std::vector<double>& t) {
    if (t.size() < 2) throw GridMismatch("time grid wants at least two nodes");
    if (std::fabs(t.front()) > 1e-12) throw GridMismatch("time grid must start at 0");
    const double h = t[1] - t[0];
    if (!(h > 0.0)) throw GridMismatch("time grid must increase");
    for (std::size_t j = 1; j < t.size(); ++j)
        if (std::fabs(t[j] - t[j - 1] - h) > 1e-10 * std::max(1.0, h))
            throw GridMismatch("time grid must be uniform");
}

// the workhorse shared by solve_linear, duhamel_* and the Picard loop
struct Engine {
    DomainPtr d;
    std::vector<double> t_grid;
    double dt = 0;
    std::size_t M = 0, K = 0;
    double p = 4.0;
    StepWeights wu, wv;
    std::vector<double> g_nodes, h_nodes;  // forcing coefficients per node
    std::vector<double> u0_hat, v0_hat;

    Engine(DomainPtr dom, std::vector<double> times, double p_exp, const ScalarField& u0,
           const ScalarField& v0, const SignalSpec& g, const SignalSpec& h)
        : d(std::move(dom)), t_grid(std::move(times)), p(p_exp) {
        check_uniform_grid(t_grid);
        dt = t_grid[1] - t_grid[0];
        M = t_grid.size();
        K = d->size();
        if (!u0.domain()->same_as(*d) || !v0.domain()->same_as(*d))
            throw DomainMismatch("initial data lives on a different domain");
        wu = make_weights(*d, 0.0, dt);
        wv = make_weights(*d, 1.0, dt);
        u0_hat.resize(K);
        v0_hat.resize(K);
        d->analyze(u0.values().data(), u0_hat.data(), all_cos());
        d->analyze(v0.values().data(), v0_hat.data(), all_cos());

        CompiledSignal gc(g, d), hc(h, d);
        g_nodes.assign(M * K, 0.0);
        h_nodes.assign(M * K, 0.0);
        for (std::size_t j = 0; j < M; ++j) {
            gc.accumulate(t_grid[j], g_nodes.data() + j * K);
            hc.accumulate(t_grid[j], h_nodes.data() + j * K);
        }
        g_mean_bound = gc.mean_bound();
    }

    double g_mean_bound = 0.0;

    // one application of the linear solution operator S to the iterate
    // (w_hat, z_hat); zero_source skips the flux entirely
    void apply(const double* w_hat, const double* z_hat, bool zero_source,
               std::vector<double>& u_out, std::vector<double>& v_out,
               std::vector<double>& scratch) const {
        scratch.assign(M * K, 0.0);
        if (!zero_source) {
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
            for (long long j = 0; j < static_cast<long long>(M); ++j) {
                SpectralField wj(d, std::vector<double>(w_hat + j * K, w_hat + (j + 1) * K));
                SpectralField zj(d, std::vector<double>(z_hat + j * K, z_hat + (j + 1) * K));
                SpectralField flux = chemotaxis_flux_hat(wj, zj);
                double* s = scratch.data() + j * K;
                for (std::size_t k = 0; k < K; ++k) s[k] = -flux[k];
            }
        }
        for (std::size_t i = 0; i < M * K; ++i) scratch[i] += g_nodes[i];

        u_out.resize(M * K);
        kernels::duhamel_sweep(wu.decay.data(), wu.wa.data(), wu.wb.data(), scratch.data(),
                               u0_hat.data(), u_out.data(), M, K);

        for (std::size_t i = 0; i < M * K; ++i) scratch[i] = u_out[i] + h_nodes[i];
        v_out.resize(M * K);
        kernels::duhamel_sweep(wv.decay.data(), wv.wa.data(), wv.wb.data(), scratch.data(),
                               v0_hat.data(), v_out.data(), M, K);
    }

    // X-norm of the difference of two spectral trajectories (b may be null)
    double xnorm_diff(const double* ua, const double* va, const double* ub,
                      const double* vb) const {
        std::vector<double> node_sums(M, 0.0);
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
        for (long long j = 0; j < static_cast<long long>(M); ++j) {
            std::vector<double> du(K), dv(K);
            for (std::size_t k = 0; k < K; ++k) {
                du[k] = ua[j * K + k] - (ub ? ub[j * K + k] : 0.0);
                dv[k] = va[j * K + k] - (vb ? vb[j * K + k] : 0.0);
            }
            node_sums[j] = grid_norm_of(d, du.data(), 0.5 * p) +
                           grid_norm_of(d, dv.data(), 0.5 * p) + grad_norm_of(d, dv.data(), p);
        }
        double sup = 0.0;
        for (double s : node_sums) sup = std::max(sup, s);
        return sup;
    }

    TrajectoryState materialize(const std::vector<double>& u_hat,
                                const std::vector<double>& v_hat) const {
        const int n = d->dim();
        std::vector<std::vector<double>> ug(M), vg(M);
        std::vector<std::vector<std::vector<double>>> gg(M);
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
        for (long long j = 0; j < static_cast<long long>(M); ++j) {
            ug[j].resize(K);
            vg[j].resize(K);
            d->synthesize(u_hat.data() + j * K, ug[j].data(), all_cos());
            SpectralField vj(d, std::vector<double>(v_hat.begin() + j * K,
                                                    v_hat.begin() + (j + 1) * K));
            d->synthesize(vj.coeffs().data(), vg[j].data(), all_cos());
            gg[j].resize(n);
            for (int a = 0; a < n; ++a) {
                SpectralField da = derivative(vj, a);
                gg[j][a].resize(K);
                d->synthesize(da.coeffs().data(), gg[j][a].data(), da.parities());
            }
        }
        TrajectoryState s;
        s.times = t_grid;
        s.u.reserve(M);
        s.v.reserve(M);
        s.grad_v.reserve(M);
        for (std::size_t j = 0; j < M; ++j) {
            s.u.emplace_back(d, std::move(ug[j]));
            s.v.emplace_back(d, std::move(vg[j]));
            std::vector<ScalarField> comps;
            std::vector<Parities> pars;
            for (int a = 0; a < n; ++a) {
                comps.emplace_back(d, std::move(gg[j][a]));
                Parities par = all_cos();
                par[a] = Parity::Sin;
                pars.push_back(par);
            }
            s.grad_v.emplace_back(std::move(comps), std::move(pars));
        }
        return s;
    }
};

// spectral trajectory of an existing grid trajectory (for source pairs)
void analyze_trajectory(const TrajectoryState& s, std::vector<double>& u_hat,
                        std::vector<double>& v_hat) {
    const DomainPtr& d = s.domain();
    const std::size_t K = d->size(), M = s.nodes();
    u_hat.resize(M * K);
    v_hat.resize(M * K);
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long j = 0; j < static_cast<long long>(M); ++j) {
        d->analyze(s.u[j].values().data(), u_hat.data() + j * K, all_cos());
        d->analyze(s.v[j].values().data(), v_hat.data() + j * K, all_cos());
    }
}

void check_mean_zero_data(const ScalarField& u0, SolverConfig::Mode mode,
                          std::vector<std::string>* warnings) {
    const double m = std::fabs(mean(u0));
    const double scale = 1.0 + lp_norm(u0, std::numeric_limits<double>::infinity());
    if (m > 1e-10 * scale) {
        if (mode == SolverConfig::Mode::Strict)
            throw MeanNotZero("u0 must be mean-zero (strict mode)");
        if (warnings) warnings->push_back("u0 is not mean-zero; proceeding (warn mode)");
    }
}

void check_mean_zero_forcing(double bound, SolverConfig::Mode mode,
                             std::vector<std::string>* warnings) {
    if (bound > 1e-10) {
        if (mode == SolverConfig::Mode::Strict)
            throw MeanNotZero("g must be mean-zero at all times (strict mode)");
        if (warnings) warnings->push_back("g has nonzero spatial mean; proceeding (warn mode)");
    }
}

double forcing_sup_norm(const ForcingSpec& forcing, const std::vector<double>& t_grid, double p) {
    const DomainPtr& d = forcing.domain();
    std::vector<double> per_node(t_grid.size(), 0.0);
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long j = 0; j < static_cast<long long>(t_grid.size()); ++j) {
        double s = 0.0;
        if (!forcing.g.empty()) s += lp_norm(forcing.g.evaluate(d, t_grid[j]), 0.5 * p);
        if (!forcing.h.empty()) s += lp_norm(forcing.h.evaluate(d, t_grid[j]), 0.5 * p);
        per_node[j] = s;
    }
    double sup = 0.0;
    for (double s : per_node) sup = std::max(sup, s);
    return sup;
}

}  // namespace

// ---------------------------------------------------------------------------
// public Duhamel operations
// ---------------------------------------------------------------------------

std::vector<ScalarField> duhamel_u(const ScalarField& u0, const TrajectoryState* omega_zeta,
                                   const SignalSpec& g, const std::vector<double>& t_grid,
                                   SolverConfig::Mode mode) {
    const DomainPtr& d = u0.domain();
    Engine eng(d, t_grid, 4.0, u0, ScalarField(d), g, SignalSpec{});
    check_mean_zero_data(u0, mode, nullptr);
    check_mean_zero_forcing(eng.g_mean_bound, mode, nullptr);

    std::vector<double> w_hat, z_hat;
    if (omega_zeta) {
        if (omega_zeta->nodes() != eng.M)
            throw GridMismatch("source trajectory does not match the time grid");
        if (!omega_zeta->domain()->same_as(*d))
            throw GridMismatch("source trajectory lives on a different domain");
        analyze_trajectory(*omega_zeta, w_hat, z_hat);
    }

    std::vector<double> u_hat, v_hat, scratch;
    eng.apply(w_hat.data(), z_hat.data(), omega_zeta == nullptr, u_hat, v_hat, scratch);

    std::vector<ScalarField> out;
    out.reserve(eng.M);
    for (std::size_t j = 0; j < eng.M; ++j) {
        std::vector<double> grid(eng.K);
        d->synthesize(u_hat.data() + j * eng.K, grid.data(), all_cos());
        out.emplace_back(d, std::move(grid));
    }
    return out;
}

VTrajectory duhamel_v(const ScalarField& v0, const std::vector<ScalarField>& u,
                      const SignalSpec& h, const std::vector<double>& t_grid) {
    if (u.size() != t_grid.size()) throw GridMismatch("u trajectory does not match the grid");
    const DomainPtr& d = v0.domain();
    Engine eng(d, t_grid, 4.0, ScalarField(d), v0, SignalSpec{}, h);

    // feed the u samples in as the v-equation source
    std::vector<double> src(eng.M * eng.K);
    for (std::size_t j = 0; j < eng.M; ++j) {
        if (!u[j].domain()->same_as(*d)) throw GridMismatch("u sample on a different domain");
        d->analyze(u[j].values().data(), src.data() + j * eng.K, all_cos());
    }
    for (std::size_t i = 0; i < src.size(); ++i) src[i] += eng.h_nodes[i];

    std::vector<double> v_hat(eng.M * eng.K);
    kernels::duhamel_sweep(eng.wv.decay.data(), eng.wv.wa.data(), eng.wv.wb.data(), src.data(),
                           eng.v0_hat.data(), v_hat.data(), eng.M, eng.K);

    TrajectoryState full = eng.materialize(std::vector<double>(eng.M * eng.K, 0.0), v_hat);
    VTrajectory out;
    out.v = std::move(full.v);
    out.grad_v = std::move(full.grad_v);
    return out;
}

// ---------------------------------------------------------------------------
// linear solve
// ---------------------------------------------------------------------------

std::pair<TrajectoryState, LinearReport> solve_linear(const ScalarField& u0,
                                                      const ScalarField& v0,
                                                      const TrajectoryState* omega_zeta,
                                                      const ForcingSpec& forcing,
                                                      const SolverConfig& config,
                                                      const SolverConstants* constants) {
    const DomainPtr& d = u0.domain();
    Engine eng(d, config.time_grid(), config.p, u0, v0, forcing.g, forcing.h);
    LinearReport rep;
    check_mean_zero_data(u0, config.smallness, &rep.warnings);
    check_mean_zero_forcing(eng.g_mean_bound, config.smallness, &rep.warnings);

    std::vector<double> w_hat, z_hat;
    if (omega_zeta) {
        if (omega_zeta->nodes() != eng.M)
            throw GridMismatch("source trajectory does not match the time grid");
        analyze_trajectory(*omega_zeta, w_hat, z_hat);
    }

    std::vector<double> u_hat, v_hat, scratch;
    eng.apply(w_hat.data(), z_hat.data(), omega_zeta == nullptr, u_hat, v_hat, scratch);
    TrajectoryState traj = eng.materialize(u_hat, v_hat);

    rep.x_norm = x_norm(traj, config.p);
    if (constants) {
        const double data_pair = lp_norm(u0, 0.5 * config.p) + lp_norm(v0, 0.5 * config.p);
        const double grad_v0 = lp_norm(gradient(v0), config.p);
        const double source_x = omega_zeta ? x_norm(*omega_zeta, config.p) : 0.0;
        const double forcing_sup = forcing_sup_norm(forcing, eng.t_grid, config.p);
        rep.bound_rhs = constants->C1 * data_pair + constants->C2 * grad_v0 +
                        constants->C3 * source_x * source_x + constants->C4 * forcing_sup;
        rep.bound_checked = true;
        rep.bound_ok = rep.x_norm <= rep.bound_rhs * (1.0 + 1e-12);
        if (!rep.bound_ok) {
            if (config.smallness == SolverConfig::Mode::Strict)
                throw BoundViolated("linear X-norm bound violated");
            rep.warnings.push_back("linear X-norm bound violated; proceeding (warn mode)");
        }
    }
    return {std::move(traj), std::move(rep)};
}

// ---------------------------------------------------------------------------
// Picard iteration
// ---------------------------------------------------------------------------

std::pair<TrajectoryState, PicardDiagnostics> picard_solve(const ScalarField& u0,
                                                           const ScalarField& v0,
                                                           const ForcingSpec& forcing,
                                                           const SolverConfig& config,
                                                           SolverConstants constants) {
    const DomainPtr& d = u0.domain();
    Engine eng(d, config.time_grid(), config.p, u0, v0, forcing.g, forcing.h);
    PicardDiagnostics diag;

    check_mean_zero_data(u0, config.smallness, &diag.warnings);
    check_mean_zero_forcing(eng.g_mean_bound, config.smallness, &diag.warnings);

    // smallness gate: the ball inequality must be feasible for some
    // rho < 1/(4 C3)
    diag.gate.data_norm = lp_norm(u0, 0.5 * config.p) + lp_norm(v0, 0.5 * config.p) +
                          lp_norm(gradient(v0), config.p);
    diag.gate.forcing_norm = forcing_sup_norm(forcing, eng.t_grid, config.p);
    diag.gate.budget = std::max(constants.C1, constants.C2) * diag.gate.data_norm +
                       constants.C4 * diag.gate.forcing_norm;
    diag.gate.threshold = 3.0 / (16.0 * constants.C3);
    diag.gate.ok = diag.gate.budget < diag.gate.threshold;
    if (!diag.gate.ok) {
        if (config.smallness == SolverConfig::Mode::Strict)
            throw SmallnessViolated("smallness gate failed: no admissible contraction ball");
        diag.warnings.push_back("smallness gate failed; proceeding (warn mode)");
    }

    const std::size_t MK = eng.M * eng.K;
    std::vector<double> u_cur(MK, 0.0), v_cur(MK, 0.0);
    std::vector<double> u_next, v_next, scratch;

    // linear response S(0,0); fixes rho
    eng.apply(nullptr, nullptr, true, u_next, v_next, scratch);
    diag.linear_response_xnorm = eng.xnorm_diff(u_next.data(), v_next.data(), nullptr, nullptr);
    constants.rho = std::min(2.0 * diag.linear_response_xnorm, 1.0 / (8.0 * constants.C3));
    constants.contraction_bound = 4.0 * constants.C3 * constants.rho;
    diag.ball_ok = diag.gate.budget + constants.C3 * constants.rho * constants.rho <=
                   constants.rho + 1e-15;
    if (!diag.ball_ok)
        diag.warnings.push_back("ball invariance does not hold at the auto-selected rho");

    int consecutive_expanding = 0;
    bool converged = false;
    if (config.initial_guess == SolverConfig::Guess::Zero) {
        const double diff1 = diag.linear_response_xnorm;
        diag.diff_norms.push_back(diff1);
        u_cur.swap(u_next);
        v_cur.swap(v_next);
        diag.iterations = 1;
        converged = diff1 <= config.tolerance;
    } else {
        // start from the linear response; iteration count starts fresh
        u_cur.swap(u_next);
        v_cur.swap(v_next);
    }

    while (!converged && diag.iterations < config.max_iterations) {
        eng.apply(u_cur.data(), v_cur.data(), false, u_next, v_next, scratch);
        ++diag.iterations;
        const double diff = eng.xnorm_diff(u_next.data(), v_next.data(), u_cur.data(),
                                           v_cur.data());
        if (!diag.diff_norms.empty()) {
            const double prev = diag.diff_norms.back();
            const double floor = std::max(10.0 * config.tolerance,
                                          1e-13 * std::max(1.0, diag.linear_response_xnorm));
            if (prev > floor) {
                const double ratio = diff / prev;
                diag.ratios.push_back(ratio);
                diag.contraction_ratio_max = std::max(diag.contraction_ratio_max, ratio);
                if (ratio >= 1.0 && diff > config.tolerance) {
                    if (++consecutive_expanding >= 5)
                        throw NoConvergence("difference norms expanded over 5 iterations");
                } else {
                    consecutive_expanding = 0;
                }
            }
        }
        diag.diff_norms.push_back(diff);
        u_cur.swap(u_next);
        v_cur.swap(v_next);
        converged = diff <= config.tolerance;
    }
    if (!converged) throw NoConvergence("picard did not converge within max iterations");
    diag.converged = true;

    // fixed-point residual: one more application of S
    eng.apply(u_cur.data(), v_cur.data(), false, u_next, v_next, scratch);
    diag.residual = eng.xnorm_diff(u_next.data(), v_next.data(), u_cur.data(), v_cur.data());

    TrajectoryState traj = eng.materialize(u_cur, v_cur);
    diag.x_norm = x_norm(traj, config.p);
    diag.constants = constants;
    return {std::move(traj), std::move(diag)};
}

std::string PicardDiagnostics::to_json() const {
    nlohmann::ordered_json j;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["diff_norms"] = diff_norms;
    j["ratios"] = ratios;
    j["contraction_ratio_max"] = contraction_ratio_max;
    j["residual"] = residual;
    j["linear_response_xnorm"] = linear_response_xnorm;
    j["x_norm"] = x_norm;
    j["gate"] = {{"data_norm", gate.data_norm},
                 {"forcing_norm", gate.forcing_norm},
                 {"budget", gate.budget},
                 {"threshold", gate.threshold},
                 {"ok", gate.ok}};
    j["ball_ok"] = ball_ok;
    j["rho"] = constants.rho;
    j["contraction_bound"] = constants.contraction_bound;
    j["constants"] = nlohmann::ordered_json::parse(constants.to_json());
    j["warnings"] = warnings;
    return j.dump(2);
}

}  // namespace kspp
