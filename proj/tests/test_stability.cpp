#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kspp/stability.hpp"
#include "oracles.hpp"

using namespace kspp;
namespace tst = kspp::testing;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

DomainPtr small_square() { return assemble_domain({kPi, kPi}, {16, 16}); }

ScalarField cos_x(const DomainPtr& d) {
    return ScalarField::from_function(d, [](const auto& x) { return std::cos(x[0]); });
}

SolverConstants constants_for(const DomainPtr& d) {
    std::vector<EstimateReport> reps;
    for (auto kind : {EstimateKind::DecayMeanZero, EstimateKind::GradientSmoothing,
                      EstimateKind::GradientToGradient, EstimateKind::DivergenceSmoothing})
        reps.push_back(verify_estimate(d, kind, 4.0, 2.0, 16, {}, 99));
    return compute_constants(d, 4.0, reps);
}

ForcingSpec two_tone_forcing(const DomainPtr& d, double amplitude) {
    SignalSpec g;
    g.ap.push_back({1.0, amplitude, 0.0, cos_x(d)});
    g.ap.push_back({kSqrt2, amplitude, 0.0, cos_x(d)});
    return ForcingSpec::create(d, g, SignalSpec{}, true);
}

// oracle for the flux-free linear regime: the difference of the two runs is
// u(t) = eps e^{-t} cos x, v(t) = eps (e^{-t} - e^{-2t}) cos x
double linear_distance_oracle(double eps, double t) {
    const double nc = kPi / std::sqrt(2.0);                  // ||cos x||_L2
    const double ns = std::pow(3.0 * kPi * kPi / 8.0, 0.25); // ||sin x||_L4
    const double a = eps * std::exp(-t);
    const double b = eps * (std::exp(-t) - std::exp(-2.0 * t));
    return std::fabs(a) * nc + std::fabs(b) * (nc + ns);
}
}  // namespace

TEST_CASE("zero perturbation degenerates") {
    auto d = small_square();
    SolverConstants c = constants_for(d);
    SolverConfig cfg;
    cfg.t_end = 2.0;
    StabilityReport rep = stability_experiment(ScalarField(d), ScalarField(d),
                                               two_tone_forcing(d, 1e-3), ScalarField(d),
                                               ScalarField(d), cfg, c);
    CHECK(rep.degenerate);
    CHECK(std::isnan(rep.sigma));
    CHECK_FALSE(rep.pass);
}

TEST_CASE("free decay matches the closed-form difference dynamics") {
    auto d = small_square();
    SolverConstants c = constants_for(d);
    SolverConfig cfg;
    cfg.t_end = 15.0;
    cfg.dt = 0.01;
    cfg.tolerance = 1e-13;

    const double eps = 1e-3;
    StabilityReport rep =
        stability_experiment(ScalarField(d), ScalarField(d), ForcingSpec::create(d, {}, {}, true),
                             eps * cos_x(d), ScalarField(d), cfg, c);
    REQUIRE_FALSE(rep.degenerate);
    // lambda1-dominant perturbation: fitted sigma within 5% of lambda1
    CHECK(rep.sigma == doctest::Approx(d->lambda1()).epsilon(0.05));
    CHECK(rep.fit_residual < 0.05);
    CHECK(rep.pass);

    for (std::size_t j = 0; j < rep.times.size(); j += 250) {
        const double oracle = linear_distance_oracle(eps, rep.times[j]);
        CHECK(rep.distances[j] == doctest::Approx(oracle).epsilon(0.02).scale(1e-12));
    }
}

TEST_CASE("default nonlinear scenario decays inside the spectral gap") {
    auto d = small_square();
    SolverConstants c = constants_for(d);
    SolverConfig cfg;
    cfg.t_end = 15.0;
    cfg.dt = 0.01;
    cfg.tolerance = 1e-13;

    StabilityReport rep =
        stability_experiment(ScalarField(d), ScalarField(d), two_tone_forcing(d, 1e-3),
                             1e-3 * cos_x(d), ScalarField(d), cfg, c);
    REQUIRE_FALSE(rep.degenerate);
    CHECK(rep.pass);
    CHECK(rep.sigma > 0.0);
    CHECK(rep.sigma < 1.05 * d->lambda1());
    CHECK(rep.sigma >= 0.5 * d->lambda1());
    CHECK(rep.fit_residual <= 0.1);
}

TEST_CASE("halving the perturbation halves the distance series") {
    auto d = small_square();
    SolverConstants c = constants_for(d);
    SolverConfig cfg;
    cfg.t_end = 12.0;
    cfg.dt = 0.01;
    cfg.tolerance = 1e-13;

    auto forcing = two_tone_forcing(d, 1e-3);
    StabilityReport full = stability_experiment(ScalarField(d), ScalarField(d), forcing,
                                                1e-3 * cos_x(d), ScalarField(d), cfg, c);
    StabilityReport half = stability_experiment(ScalarField(d), ScalarField(d), forcing,
                                                0.5e-3 * cos_x(d), ScalarField(d), cfg, c);
    REQUIRE(full.distances.size() == half.distances.size());
    for (std::size_t j = 0; j < full.times.size(); ++j) {
        if (full.times[j] < full.fit_window_start) continue;
        if (full.distances[j] < 1e-11) continue;  // discretization floor
        CHECK(half.distances[j] == doctest::Approx(0.5 * full.distances[j]).epsilon(0.1));
    }
}

TEST_CASE("gronwall integrals stay below their closed-form bounds") {
    const double lambda1 = 1.0;
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(i * 1.0);

    for (double frac : {0.25, 0.5, 0.75}) {
        GronwallResult res = gronwall_integrals(lambda1, frac * lambda1, 2, 4.0, grid);
        CHECK(res.pass);
        CHECK(res.I1.front() == 0.0);
        CHECK(res.I2.front() == 0.0);
        for (std::size_t i = 1; i < res.I1.size(); ++i)
            CHECK(res.I1[i] >= res.I1[i - 1] - 1e-12);  // monotone saturation
        for (std::size_t i = 0; i < res.I1.size(); ++i) {
            CHECK(res.I1[i] <= res.B1 * (1 + 1e-12));
            CHECK(res.I2[i] <= res.B2 * (1 + 1e-12));
        }
    }
}

TEST_CASE("gronwall closed forms at the reference point") {
    // lambda1 = 1, sigma = 1/2, n = 2, p = 4:
    // B1 = 2 + 2^{1/4} Gamma(1/4), B2 = B1/(3/2)
    std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0};
    GronwallResult res = gronwall_integrals(1.0, 0.5, 2, 4.0, grid);
    const double gamma_quarter = tst::gamma_integral_oracle(0.25);
    const double b1 = 2.0 + std::pow(2.0, 0.25) * gamma_quarter;
    CHECK(res.B1 == doctest::Approx(b1).epsilon(1e-10));
    CHECK(res.B1 == doctest::Approx(6.3116).epsilon(1e-4));
    CHECK(res.B2 == doctest::Approx(b1 / 1.5).epsilon(1e-10));

    // I1 against an independent quadrature: the z^{-3/4} part maps to a
    // smooth integrand under z = w^4
    const double mu = 0.5;
    for (double t : {0.5, 2.0, 10.0}) {
        const double plain =
            tst::adaptive_simpson([&](double z) { return std::exp(-mu * z); }, 0.0, t, 1e-13);
        const double singular = tst::adaptive_simpson(
            [&](double w) { return 4.0 * std::exp(-mu * w * w * w * w); }, 0.0,
            std::pow(t, 0.25), 1e-13);
        const double oracle = plain + singular;
        const std::size_t idx = std::find(grid.begin(), grid.end(), t) - grid.begin();
        CHECK(res.I1[idx] == doctest::Approx(oracle).epsilon(1e-8));
    }

    // I2 against the nested quadrature using the oracle I1
    {
        const double t = 2.0;
        auto I1_oracle = [&](double s) {
            const double plain = tst::adaptive_simpson(
                [&](double z) { return std::exp(-mu * z); }, 0.0, s, 1e-12);
            const double singular = tst::adaptive_simpson(
                [&](double w) { return 4.0 * std::exp(-mu * w * w * w * w); }, 0.0,
                std::pow(s, 0.25), 1e-12);
            return plain + singular;
        };
        const double oracle = tst::adaptive_simpson(
            [&](double s) { return std::exp(-1.5 * (t - s)) * I1_oracle(s); }, 0.0, t, 1e-10);
        const std::size_t idx = std::find(grid.begin(), grid.end(), t) - grid.begin();
        CHECK(res.I2[idx] == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("gronwall precondition checks") {
    std::vector<double> grid{0.0, 1.0};
    CHECK_THROWS_AS(gronwall_integrals(1.0, 1.0, 2, 4.0, grid), RateOrderViolation);
    CHECK_THROWS_AS(gronwall_integrals(1.0, 1.5, 2, 4.0, grid), RateOrderViolation);
    CHECK_THROWS_AS(gronwall_integrals(1.0, -0.1, 2, 4.0, grid), RateOrderViolation);
    CHECK_THROWS_AS(gronwall_integrals(1.0, 0.5, 2, 1.5, grid), ExponentRegimeViolation);
}
