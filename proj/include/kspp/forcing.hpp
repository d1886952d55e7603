#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kspp/fields.hpp"

namespace kspp {

// --- forcing signals ---------------------------------------------------------

/// One almost-periodic component: amplitude * sin(frequency t + phase)
/// times a spatial profile.
struct Sinusoid {
    double frequency = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    ScalarField profile;
};

enum class TailKind { None, Reciprocal, Exponential };

/// Vanishing-at-infinity envelope: c/(1+t) or c e^{-beta t}, times a profile.
struct TailSpec {
    TailKind kind = TailKind::None;
    double c = 0.0;
    double beta = 0.0;
    std::optional<ScalarField> profile;

    double envelope(double t) const;
};

/// AP part plus tail for one signal (g or h). With no tail the signal
/// extends to all of R by construction.
struct SignalSpec {
    std::vector<Sinusoid> ap;
    TailSpec tail;

    ScalarField evaluate(const DomainPtr& domain, double t) const;
    /// sup over the sampled horizon of the L^p norm (for smallness gates).
    double sup_lp_norm(const DomainPtr& domain, double p, double t_end, double dt) const;
    bool empty() const { return ap.empty() && tail.kind == TailKind::None; }
};

/// Declarative description of the pair (g, h). With mean_zero_g set, every
/// spatial profile of g is projected mean-zero at construction.
struct ForcingSpec {
    SignalSpec g, h;
    bool mean_zero_g = true;

    static ForcingSpec create(DomainPtr domain, SignalSpec g, SignalSpec h,
                              bool mean_zero_g = true);

    const DomainPtr& domain() const { return domain_; }

  private:
    DomainPtr domain_;
};

/// (g(t), h(t)) on the grid. If mean_zero_g is set, g is mean-zero to 1e-12.
std::pair<ScalarField, ScalarField> evaluate_forcing(const ForcingSpec& spec, double t);

// --- almost-period detection -------------------------------------------------

/// Uniformly sampled vector-valued signal; values[i][c] is component c at
/// time t0 + i*dt. The translation defect between two times is the sum of
/// component distances.
struct SampledSignal {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> values;

    std::size_t count() const { return values.size(); }
    double duration() const { return values.empty() ? 0.0 : dt * (values.size() - 1); }
    SampledSignal from_time(double start) const;
};

struct AlmostPeriodReport {
    double epsilon = 0.0;
    double t_max = 0.0;
    double dt_scan = 0.0;
    std::vector<double> periods;     // all scan T with defect < epsilon
    double max_gap = 0.0;            // between consecutive periods (and window edges)
    bool relatively_dense = false;
    double best_period = 0.0;        // smallest-defect nontrivial period (0 = none)
    double sup_defect = 0.0;         // defect of best_period
    std::string to_json() const;
};

/// Scan T in (0, t_max] on a dt_scan grid and measure the translation
/// defect sup_t ||f(t+T) - f(t)|| over the sampled window. The window must
/// be at least 4 * t_max long (WindowTooShort otherwise).
AlmostPeriodReport find_almost_periods(const SampledSignal& signal, double epsilon,
                                       double t_max, double dt_scan);

struct AapReport {
    bool is_aap = false;
    double epsilon = 0.0;
    double transient_cut = 0.0;
    AlmostPeriodReport periods;             // from the tail window
    std::vector<double> window_starts;      // late-window growth diagnostic
    std::vector<double> window_defects;
    bool defect_nonincreasing = false;
    std::string to_json() const;
};

/// Operational AAP certificate: relatively dense epsilon-periods on the
/// tail window [transient_cut, end], and the best-period defect does not
/// grow across later and later windows. Needs duration > 2 * transient_cut.
AapReport verify_aap(const SampledSignal& trajectory, double epsilon, double transient_cut);

}  // namespace kspp
