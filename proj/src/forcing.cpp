#include "kspp/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "kspp/threading.hpp"

namespace kspp {

double TailSpec::envelope(double t) const {
    switch (kind) {
        case TailKind::None: return 0.0;
        case TailKind::Reciprocal: return c / (1.0 + t);
        case TailKind::Exponential: return c * std::exp(-beta * t);
    }
    return 0.0;
}

ScalarField SignalSpec::evaluate(const DomainPtr& domain, double t) const {
    ScalarField out(domain);
    for (const Sinusoid& s : ap) {
        const double env = s.amplitude * std::sin(s.frequency * t + s.phase);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += env * s.profile[i];
    }
    if (tail.kind != TailKind::None && tail.profile) {
        const double env = tail.envelope(t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += env * (*tail.profile)[i];
    }
    return out;
}

double SignalSpec::sup_lp_norm(const DomainPtr& domain, double p, double t_end, double dt) const {
    if (empty()) return 0.0;
    double sup = 0.0;
    const int n = static_cast<int>(std::ceil(t_end / dt));
    for (int i = 0; i <= n; ++i) sup = std::max(sup, lp_norm(evaluate(domain, i * dt), p));
    return sup;
}

ForcingSpec ForcingSpec::create(DomainPtr domain, SignalSpec g, SignalSpec h, bool mean_zero_g) {
    auto check_signal = [&](const SignalSpec& s) {
        for (const auto& sin : s.ap)
            if (!sin.profile.domain()->same_as(*domain))
                throw DomainMismatch("forcing profile lives on a different domain");
        if (s.tail.kind != TailKind::None) {
            if (!s.tail.profile) throw Error("tail forcing wants a spatial profile");
            if (!s.tail.profile->domain()->same_as(*domain))
                throw DomainMismatch("tail profile lives on a different domain");
        }
    };
    check_signal(g);
    check_signal(h);
    if (mean_zero_g) {
        for (auto& sin : g.ap) sin.profile = project_mean_zero(sin.profile);
        if (g.tail.profile) g.tail.profile = project_mean_zero(*g.tail.profile);
    }
    ForcingSpec spec;
    spec.g = std::move(g);
    spec.h = std::move(h);
    spec.mean_zero_g = mean_zero_g;
    spec.domain_ = std::move(domain);
    return spec;
}

std::pair<ScalarField, ScalarField> evaluate_forcing(const ForcingSpec& spec, double t) {
    return {spec.g.evaluate(spec.domain(), t), spec.h.evaluate(spec.domain(), t)};
}

SampledSignal SampledSignal::from_time(double start) const {
    SampledSignal out;
    out.dt = dt;
    const std::size_t skip =
        start <= t0 ? 0 : static_cast<std::size_t>(std::ceil((start - t0) / dt - 1e-9));
    if (skip >= values.size()) throw WindowTooShort("window start beyond the sampled signal");
    out.t0 = t0 + skip * dt;
    out.values.assign(values.begin() + skip, values.end());
    return out;
}

namespace {

// sup over the overlap of the summed component distance at shift j
double defect_at(const SampledSignal& sig, std::size_t j) {
    const std::size_t m = sig.values.size();
    double d = 0.0;
    for (std::size_t i = 0; i + j < m; ++i) {
        const auto& a = sig.values[i];
        const auto& b = sig.values[i + j];
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += std::fabs(b[c] - a[c]);
        d = std::max(d, s);
    }
    return d;
}

}  // namespace

AlmostPeriodReport find_almost_periods(const SampledSignal& signal, double epsilon,
                                       double t_max, double dt_scan) {
    if (epsilon <= 0.0) throw Error("epsilon must be positive");
    if (signal.dt <= 0.0 || signal.values.size() < 2)
        throw WindowTooShort("signal is not sampled");
    if (signal.duration() < 4.0 * t_max - 1e-9)
        throw WindowTooShort("signal window shorter than 4 * t_max");

    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dt_scan / signal.dt)));
    const double step = stride * signal.dt;
    const std::size_t n_candidates =
        static_cast<std::size_t>(std::floor((t_max + 1e-12) / step));

    std::vector<double> defects(n_candidates);
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long c = 0; c < static_cast<long long>(n_candidates); ++c)
        defects[c] = defect_at(signal, (c + 1) * stride);

    AlmostPeriodReport rep;
    rep.epsilon = epsilon;
    rep.t_max = t_max;
    rep.dt_scan = step;

    for (std::size_t c = 0; c < n_candidates; ++c)
        if (defects[c] < epsilon) rep.periods.push_back((c + 1) * step);

    // gaps over the scan window, counting both edges
    double prev = 0.0;
    rep.max_gap = 0.0;
    for (double T : rep.periods) {
        rep.max_gap = std::max(rep.max_gap, T - prev);
        prev = T;
    }
    rep.max_gap = std::max(rep.max_gap, t_max - prev);

    // cluster consecutive hits; the cluster touching T = 0 carries the
    // trivial continuity periods and is excluded from the density measure
    struct Cluster {
        double lo, hi, best_T, best_defect;
        bool trivial;
    };
    std::vector<Cluster> clusters;
    for (std::size_t c = 0; c < n_candidates; ++c) {
        if (defects[c] >= epsilon) continue;
        const double T = (c + 1) * step;
        if (!clusters.empty() && T - clusters.back().hi <= 2.0 * step + 1e-12) {
            Cluster& cl = clusters.back();
            cl.hi = T;
            if (defects[c] < cl.best_defect) {
                cl.best_defect = defects[c];
                cl.best_T = T;
            }
        } else {
            clusters.push_back({T, T, T, defects[c], c == 0});
        }
    }

    const bool all_qualify = (rep.periods.size() == n_candidates && n_candidates > 0);
    std::vector<double> centers;
    for (const Cluster& cl : clusters)
        if (!cl.trivial) centers.push_back(0.5 * (cl.lo + cl.hi));

    if (all_qualify) {
        rep.relatively_dense = true;
    } else if (!centers.empty()) {
        std::vector<double> spacings;
        double last = 0.0;
        for (double c : centers) {
            spacings.push_back(c - last);
            last = c;
        }
        const double widest = *std::max_element(spacings.begin(), spacings.end());
        const double densest = *std::min_element(spacings.begin(), spacings.end());
        const double trailing = t_max - centers.back();
        rep.relatively_dense = (widest <= 3.0 * densest) && (trailing <= widest);
    }

    const Cluster* best = nullptr;
    for (const Cluster& cl : clusters) {
        if (cl.trivial && clusters.size() > 1) continue;
        if (!best || cl.best_defect < best->best_defect) best = &cl;
    }
    if (best) {
        rep.best_period = best->best_T;
        rep.sup_defect = best->best_defect;
    }
    return rep;
}

AapReport verify_aap(const SampledSignal& trajectory, double epsilon, double transient_cut) {
    if (trajectory.duration() <= 2.0 * transient_cut)
        throw WindowTooShort("trajectory must extend beyond twice the transient cut");

    AapReport rep;
    rep.epsilon = epsilon;
    rep.transient_cut = transient_cut;

    const SampledSignal tail = trajectory.from_time(trajectory.t0 + transient_cut);
    const double t_max = tail.duration() / 4.0;
    const double dt_scan = std::max(tail.dt, t_max / 2000.0);
    rep.periods = find_almost_periods(tail, epsilon, t_max, dt_scan);

    // defect of the best period over later and later windows
    rep.defect_nonincreasing = true;
    if (rep.periods.best_period > 0.0) {
        const std::size_t shift = static_cast<std::size_t>(
            std::llround(rep.periods.best_period / tail.dt));
        const double span = tail.duration();
        double prev = std::numeric_limits<double>::infinity();
        for (int w = 0; w < 4; ++w) {
            const double start = tail.t0 + w * span / 8.0;
            const SampledSignal window = tail.from_time(start);
            if (window.values.size() <= shift + 2) break;
            const double d = defect_at(window, shift);
            rep.window_starts.push_back(start);
            rep.window_defects.push_back(d);
            if (d > prev + 1e-3) rep.defect_nonincreasing = false;
            prev = d;
        }
    }

    rep.is_aap = rep.periods.relatively_dense && rep.defect_nonincreasing;
    return rep;
}

std::string AlmostPeriodReport::to_json() const {
    nlohmann::ordered_json j;
    j["epsilon"] = epsilon;
    j["t_max"] = t_max;
    j["dt_scan"] = dt_scan;
    j["period_count"] = periods.size();
    // cap the listing; the full set can be thousands of near-duplicates
    nlohmann::ordered_json sample = nlohmann::ordered_json::array();
    const std::size_t step = std::max<std::size_t>(1, periods.size() / 64);
    for (std::size_t i = 0; i < periods.size(); i += step) sample.push_back(periods[i]);
    j["periods"] = sample;
    j["max_gap"] = max_gap;
    j["relatively_dense"] = relatively_dense;
    j["best_period"] = best_period;
    j["sup_defect"] = sup_defect;
    return j.dump(2);
}

std::string AapReport::to_json() const {
    nlohmann::ordered_json j;
    j["is_aap"] = is_aap;
    j["epsilon"] = epsilon;
    j["transient_cut"] = transient_cut;
    j["periods"] = nlohmann::ordered_json::parse(periods.to_json());
    j["window_starts"] = window_starts;
    j["window_defects"] = window_defects;
    j["defect_nonincreasing"] = defect_nonincreasing;
    return j.dump(2);
}

}  // namespace kspp
