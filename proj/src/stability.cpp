#include "kspp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "kspp/fit.hpp"

namespace kspp {

StabilityReport stability_experiment(const ScalarField& u0, const ScalarField& v0,
                                     const ForcingSpec& forcing, const ScalarField& du0,
                                     const ScalarField& dv0, const SolverConfig& config,
                                     const SolverConstants& constants,
                                     const StabilityOptions& options) {
    StabilityReport rep;
    rep.lambda1 = u0.domain()->lambda1();

    auto [base, base_diag] = picard_solve(u0, v0, forcing, config, constants);

    rep.perturbation_norm = lp_norm(du0, 0.5 * config.p) + lp_norm(dv0, 0.5 * config.p) +
                            lp_norm(gradient(dv0), config.p);
    if (rep.perturbation_norm > 0.1 * base_diag.constants.rho)
        rep.warnings.push_back("perturbation exceeds 10% of the contraction radius rho");

    auto [pert, pert_diag] =
        picard_solve(u0 + du0, v0 + dv0, forcing, config, constants);

    rep.times = base.times;
    rep.distances = distance_series(pert, base, config.p);

    const double d0 = rep.distances.front();
    const double peak = *std::max_element(rep.distances.begin(), rep.distances.end());
    if (peak < 1e-14 * (1.0 + x_norm(base, config.p))) {
        rep.degenerate = true;
        rep.sigma = std::numeric_limits<double>::quiet_NaN();
        rep.D = std::numeric_limits<double>::quiet_NaN();
        rep.warnings.push_back("distance series is identically zero; sigma undefined");
        return rep;
    }

    rep.fit_window_start = options.window_factor / rep.lambda1;
    std::vector<double> ts, logs;
    for (std::size_t j = 0; j < rep.times.size(); ++j) {
        if (rep.times[j] < rep.fit_window_start) continue;
        if (rep.distances[j] <= 0.0) continue;
        ts.push_back(rep.times[j]);
        logs.push_back(std::log(rep.distances[j]));
    }
    if (ts.size() < 2) {
        rep.degenerate = true;
        rep.sigma = std::numeric_limits<double>::quiet_NaN();
        rep.D = std::numeric_limits<double>::quiet_NaN();
        rep.warnings.push_back("distance series vanished on the fit window");
        return rep;
    }

    const LinearFit fit = linear_fit(ts, logs);
    rep.sigma = -fit.slope;
    rep.D = std::exp(fit.intercept) / d0;
    rep.fit_residual = fit.rms_residual;
    rep.pass = (rep.sigma > 0.0) && (rep.sigma < rep.lambda1) &&
               (rep.fit_residual <= options.residual_threshold);
    return rep;
}

namespace {

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int depth) {
            const double m = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - m) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (depth > 40 || std::fabs(left + right - whole) < tol)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, m, flo, flm, fmid, left, depth + 1) +
                   rec(m, hi, fmid, frm, fhi, right, depth + 1);
        };
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, 0);
}

}  // namespace

GronwallResult gronwall_integrals(double lambda1, double sigma, int n, double p,
                                  const std::vector<double>& t_grid) {
    if (!(sigma > 0.0) || sigma >= lambda1)
        throw RateOrderViolation("gronwall integrals want 0 < sigma < lambda1");
    if (!(p > n)) throw ExponentRegimeViolation("gronwall integrals want p > n");

    GronwallResult res;
    res.sigma = sigma;
    res.beta = 0.5 + 0.5 * n / p;
    const double mu = lambda1 - sigma;
    const double a = 1.0 - res.beta;  // = 1/2 - n/(2p) in (0, 1/2)
    const double gamma_a = gamma_function(a);

    res.B1 = 1.0 / mu + std::pow(mu, res.beta - 1.0) * gamma_a;
    res.B2 = res.B1 / (lambda1 + 1.0 - sigma);

    // I1(t) closed form via the lower incomplete gamma
    auto I1_of = [&](double t) {
        if (t <= 0.0) return 0.0;
        return -std::expm1(-mu * t) / mu +
               std::pow(mu, res.beta - 1.0) * boost::math::tgamma_lower(a, mu * t);
    };

    res.t = t_grid;
    res.I1.reserve(t_grid.size());
    res.I2.reserve(t_grid.size());
    res.pass = true;
    for (double t : t_grid) {
        const double i1 = I1_of(t);
        // I2(t) = int_0^t e^{-(mu+1)(t-s)} I1(s) ds
        const double i2 = adaptive_simpson(
            [&](double s) { return std::exp(-(mu + 1.0) * (t - s)) * I1_of(s); }, 0.0, t, 1e-12);
        res.I1.push_back(i1);
        res.I2.push_back(i2);
        if (i1 > res.B1 * (1.0 + 1e-12) || i2 > res.B2 * (1.0 + 1e-12)) res.pass = false;
    }
    return res;
}

std::string StabilityReport::to_json() const {
    nlohmann::ordered_json j;
    j["sigma"] = degenerate ? nlohmann::ordered_json() : nlohmann::ordered_json(sigma);
    j["D"] = degenerate ? nlohmann::ordered_json() : nlohmann::ordered_json(D);
    j["fit_residual"] = fit_residual;
    j["lambda1"] = lambda1;
    j["pass"] = pass;
    j["degenerate"] = degenerate;
    j["perturbation_norm"] = perturbation_norm;
    j["fit_window_start"] = fit_window_start;
    j["warnings"] = warnings;
    return j.dump(2);
}

std::string GronwallResult::to_json() const {
    nlohmann::ordered_json j;
    j["sigma"] = sigma;
    j["beta"] = beta;
    j["B1"] = B1;
    j["B2"] = B2;
    j["I1_max"] = I1.empty() ? 0.0 : *std::max_element(I1.begin(), I1.end());
    j["I2_max"] = I2.empty() ? 0.0 : *std::max_element(I2.begin(), I2.end());
    j["pass"] = pass;
    return j.dump(2);
}

}  // namespace kspp
