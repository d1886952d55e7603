#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "kspp/semigroup.hpp"
#include "oracles.hpp"

using namespace kspp;
namespace tst = kspp::testing;

namespace {
constexpr double kPi = std::numbers::pi;

DomainPtr unit_square() { return assemble_domain({kPi, kPi}, {32, 32}); }

ScalarField cos_x(const DomainPtr& d) {
    return ScalarField::from_function(d, [](const auto& x) { return std::cos(x[0]); });
}

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}
}  // namespace

TEST_CASE("heat propagation of eigenfunctions and constants") {
    auto d = unit_square();
    ScalarField decayed = heat_propagate(cos_x(d), 1.0);
    for (std::size_t i = 0; i < decayed.size(); ++i) {
        const auto x = d->point(i);
        CHECK(decayed[i] ==
              doctest::Approx(std::exp(-1.0) * std::cos(x[0])).epsilon(1e-12).scale(1.0));
    }

    ScalarField c = heat_propagate(ScalarField(d, 3.0), 2.7);
    CHECK(max_diff(c, ScalarField(d, 3.0)) < 1e-13);

    CHECK_THROWS_AS(heat_propagate(cos_x(d), -0.1), NegativeTime);
}

TEST_CASE("heat decay matches the per-mode summation oracle") {
    auto d = unit_square();
    ScalarField f = project_mean_zero(tst::white_random_field(d, 7));
    const double t = 0.7;
    const double measured = lp_norm(heat_propagate(f, t), 2.0);

    SpectralField hat = to_spectral(f);
    double sum = 0.0;
    for (std::size_t i = 0; i < d->size(); ++i) {
        const double lam = d->eigenvalues()[i];
        sum += std::exp(-2.0 * lam * t) * hat[i] * hat[i] * d->mode_weights()[i];
    }
    CHECK(std::fabs(measured - std::sqrt(sum)) < 1e-10);
}

TEST_CASE("mass is conserved exactly in coefficients") {
    auto d = unit_square();
    ScalarField f = tst::white_random_field(d, 8);
    for (double t : {0.01, 0.5, 3.0})
        CHECK(mean(heat_propagate(f, t)) == doctest::Approx(mean(f)).epsilon(1e-14));
}

TEST_CASE("shifted propagation") {
    auto d = unit_square();
    ScalarField half = shifted_propagate(ScalarField(d, 1.0), std::log(2.0));
    CHECK(max_diff(half, ScalarField(d, 0.5)) < 1e-14);

    ScalarField e2 = shifted_propagate(cos_x(d), 1.0);
    for (std::size_t i = 0; i < e2.size(); ++i) {
        const auto x = d->point(i);
        CHECK(e2[i] == doctest::Approx(std::exp(-2.0) * std::cos(x[0])).epsilon(1e-12).scale(1.0));
    }

    ScalarField f = tst::white_random_field(d, 9);
    const double t = 0.42;
    ScalarField a = shifted_propagate(f, t);
    ScalarField b = std::exp(-t) * heat_propagate(f, t);
    CHECK(a.values() == b.values());  // same arithmetic path by definition
}

TEST_CASE("gradient propagation") {
    auto d = unit_square();
    VectorField g = grad_propagate(cos_x(d), 1.0);
    for (std::size_t i = 0; i < g.component(0).size(); ++i) {
        const auto x = d->point(i);
        CHECK(g.component(0)[i] ==
              doctest::Approx(-std::exp(-1.0) * std::sin(x[0])).epsilon(1e-12).scale(1.0));
        CHECK(std::fabs(g.component(1)[i]) < 1e-13);
    }

    VectorField z = grad_propagate(ScalarField(d, 4.0), 0.3);
    CHECK(lp_norm(z, std::numeric_limits<double>::infinity()) < 1e-11);

    // L2 gradient norm against the per-mode oracle sum
    ScalarField f = tst::white_random_field(d, 10);
    SpectralField hat = to_spectral(f);
    const double t = 0.25;
    double sum = 0.0;
    for (std::size_t i = 0; i < d->size(); ++i) {
        const double lam = d->eigenvalues()[i];
        sum += lam * std::exp(-2.0 * lam * t) * hat[i] * hat[i] * d->mode_weights()[i];
    }
    CHECK(std::fabs(lp_norm(grad_propagate(f, t), 2.0) - std::sqrt(sum)) < 1e-10);
}

TEST_CASE("sup ratio of the gradient estimate is stable under sample doubling") {
    auto d = unit_square();
    // hand-rolled ratio fit at p = q = 2 over t in [0.01, 5]
    auto fit_k = [&](int nsamples) {
        double k = 0.0;
        for (int s = 0; s < nsamples; ++s) {
            ScalarField f = tst::white_random_field(d, 1000 + s);
            const double rhs = lp_norm(f, 2.0);
            for (int ti = 0; ti < 24; ++ti) {
                const double t = 0.01 * std::pow(5.0 / 0.01, ti / 23.0);
                const double lhs = lp_norm(grad_propagate(f, t), 2.0);
                k = std::max(k, lhs / ((1.0 + 1.0 / std::sqrt(t)) * std::exp(-d->lambda1() * t) * rhs));
            }
        }
        return k;
    };
    const double k8 = fit_k(8), k16 = fit_k(16);
    CHECK(k16 >= k8);
    CHECK(k16 <= 1.1 * k8);
}

TEST_CASE("propagate_div") {
    auto d = unit_square();
    ScalarField r = propagate_div(gradient(cos_x(d)), 1.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto x = d->point(i);
        CHECK(r[i] == doctest::Approx(-std::exp(-1.0) * std::cos(x[0])).epsilon(1e-11).scale(1.0));
    }

    VectorField zero(d);
    ScalarField rz = propagate_div(zero, 0.5);
    CHECK(lp_norm(rz, std::numeric_limits<double>::infinity()) < 1e-14);

    VectorField g = gradient(tst::white_random_field(d, 12));
    CHECK(std::fabs(mean(propagate_div(g, 0.8))) < 1e-10);
}

TEST_CASE("semigroup composition law") {
    auto d = unit_square();
    ScalarField f = tst::white_random_field(d, 13);
    const double s = 0.37, t = 1.21;
    SpectralField one = to_spectral(heat_propagate(heat_propagate(f, s), t));
    SpectralField two = to_spectral(heat_propagate(f, s + t));
    double err = 0.0;
    for (std::size_t i = 0; i < d->size(); ++i) err = std::max(err, std::fabs(one[i] - two[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("commutation of gradient with the semigroup splitting") {
    auto d = unit_square();
    ScalarField f = tst::white_random_field(d, 14);
    const double s = 0.2, t = 0.6;
    VectorField a = grad_propagate(f, s + t);
    VectorField b = gradient(heat_propagate(heat_propagate(f, s), t));
    double err = 0.0;
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < f.size(); ++i)
            err = std::max(err, std::fabs(a.component(c)[i] - b.component(c)[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("spectral gap decay for mean-zero data") {
    auto d = unit_square();
    ScalarField f = project_mean_zero(tst::white_random_field(d, 15));
    const double n0 = lp_norm(f, 2.0);
    for (double t : {0.001, 0.05, 0.3, 1.0, 4.0})
        CHECK(lp_norm(heat_propagate(f, t), 2.0) <=
              std::exp(-d->lambda1() * t) * n0 * (1.0 + 1e-12));
}

TEST_CASE("verify_estimate: eigenfunction-only decay ratio is exactly 1/2") {
    auto d = unit_square();
    EstimateOptions opt;
    opt.bumps = false;
    opt.eigen_modes = {{1, 0, 0}};
    EstimateReport rep = verify_estimate(d, EstimateKind::DecayMeanZero, 2.0, 2.0, 0,
                                         default_t_grid(), 1, opt);
    CHECK(rep.k == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.stable);
}

TEST_CASE("verify_estimate: single-mode gradient smoothing stays below 1") {
    auto d = unit_square();
    EstimateOptions opt;
    opt.bumps = false;
    opt.eigen_modes = {{1, 0, 0}};
    EstimateReport rep = verify_estimate(d, EstimateKind::GradientSmoothing, 2.0, 2.0, 0,
                                         default_t_grid(), 1, opt);
    CHECK(rep.k <= 1.0);
}

TEST_CASE("verify_estimate rejects bad exponent orderings") {
    auto d = unit_square();
    CHECK_THROWS_AS(verify_estimate(d, EstimateKind::DecayMeanZero, 2.0, 4.0, 4, {}, 1),
                    ExponentOrderViolation);
    CHECK_THROWS_AS(verify_estimate(d, EstimateKind::GradientToGradient, 4.0, 1.0, 4, {}, 1),
                    ExponentOrderViolation);
    CHECK_THROWS_AS(
        verify_estimate(d, EstimateKind::GradientToGradient,
                        std::numeric_limits<double>::infinity(), 2.0, 4, {}, 1),
        ExponentOrderViolation);
    CHECK_THROWS_AS(verify_estimate(d, EstimateKind::DivergenceSmoothing, 4.0, 1.0, 4, {}, 1),
                    ExponentOrderViolation);
}

TEST_CASE("verify_estimate passes the default configuration per kind") {
    auto d = unit_square();
    for (auto kind : {EstimateKind::DecayMeanZero, EstimateKind::GradientSmoothing,
                      EstimateKind::GradientToGradient, EstimateKind::DivergenceSmoothing}) {
        EstimateReport rep = verify_estimate(d, kind, 4.0, 2.0, 16, {}, 2024);
        INFO("kind ", rep.kind, "  k=", rep.k, "  slope=", rep.slope_fit, " target=",
             rep.slope_target, " stable=", rep.stable);
        CHECK(rep.pass);
        CHECK(rep.k > 0.0);
        CHECK(std::isfinite(rep.k));
    }
}

TEST_CASE("estimate report serializes to json") {
    auto d = unit_square();
    EstimateOptions opt;
    opt.bumps = false;
    opt.eigen_modes = {{1, 0, 0}};
    EstimateReport rep =
        verify_estimate(d, EstimateKind::DecayMeanZero, 2.0, 2.0, 0, default_t_grid(), 1, opt);
    auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["kind"] == "i");
    CHECK(j["p"] == 2.0);
    CHECK(j.contains("k"));
    CHECK(j.contains("slope_fit"));
    CHECK(j.contains("pass"));
}
