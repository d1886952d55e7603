#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "kspp/forcing.hpp"

using namespace kspp;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

DomainPtr unit_square() { return assemble_domain({kPi, kPi}, {32, 32}); }

ScalarField cos_x(const DomainPtr& d) {
    return ScalarField::from_function(d, [](const auto& x) { return std::cos(x[0]); });
}

SampledSignal sample_scalar(const std::function<double(double)>& f, double t_end, double dt) {
    SampledSignal s;
    s.t0 = 0.0;
    s.dt = dt;
    const std::size_t n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
    s.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.values.push_back({f(i * dt)});
    return s;
}
}  // namespace

TEST_CASE("evaluate_forcing: single sinusoid at its peak") {
    auto d = unit_square();
    SignalSpec g;
    g.ap.push_back({1.0, 1.0, 0.0, cos_x(d)});
    ForcingSpec spec = ForcingSpec::create(d, g, SignalSpec{}, true);

    auto [gv, hv] = evaluate_forcing(spec, kPi / 2.0);
    for (std::size_t i = 0; i < gv.size(); ++i) {
        const auto x = d->point(i);
        CHECK(gv[i] == doctest::Approx(std::cos(x[0])).epsilon(1e-12).scale(1.0));
        CHECK(hv[i] == 0.0);
    }
}

TEST_CASE("evaluate_forcing: reciprocal tail at t = 0") {
    auto d = unit_square();
    SignalSpec h;
    h.tail.kind = TailKind::Reciprocal;
    h.tail.c = 1.0;
    h.tail.profile = ScalarField(d, 1.0);
    ForcingSpec spec = ForcingSpec::create(d, SignalSpec{}, h, true);

    auto [gv, hv] = evaluate_forcing(spec, 0.0);
    CHECK(lp_norm(gv, std::numeric_limits<double>::infinity()) == 0.0);
    for (std::size_t i = 0; i < hv.size(); ++i) CHECK(hv[i] == doctest::Approx(1.0));

    auto [gv2, hv2] = evaluate_forcing(spec, 3.0);
    for (std::size_t i = 0; i < hv2.size(); ++i) CHECK(hv2[i] == doctest::Approx(0.25));
}

TEST_CASE("evaluate_forcing: closed-form two-tone check") {
    auto d = unit_square();
    SignalSpec g;
    g.ap.push_back({1.0, 1.0, 0.0, cos_x(d)});
    g.ap.push_back({kSqrt2, 1.0, 0.0, cos_x(d)});
    ForcingSpec spec = ForcingSpec::create(d, g, SignalSpec{}, true);

    const double t = 10.0;
    auto [gv, hv] = evaluate_forcing(spec, t);
    const double env = std::sin(t) + std::sin(kSqrt2 * t);
    for (std::size_t i = 0; i < gv.size(); ++i) {
        const auto x = d->point(i);
        CHECK(gv[i] == doctest::Approx(env * std::cos(x[0])).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("mean_zero_g projects the profiles") {
    auto d = unit_square();
    SignalSpec g;
    g.ap.push_back({1.0, 1.0, 0.0, ScalarField(d, 1.0) + cos_x(d)});
    ForcingSpec spec = ForcingSpec::create(d, g, SignalSpec{}, true);
    auto [gv, hv] = evaluate_forcing(spec, kPi / 2.0);
    CHECK(std::fabs(mean(gv)) < 1e-12);
}

TEST_CASE("find_almost_periods on sin t finds the 2 pi comb") {
    auto sig = sample_scalar([](double t) { return std::sin(t); }, 200.0, 0.01);
    auto rep = find_almost_periods(sig, 0.1, 50.0, 0.01);
    REQUIRE(!rep.periods.empty());
    // every found period sits within ~0.1 of a multiple of 2 pi
    for (double T : rep.periods) {
        const double frac = std::fabs(T / (2 * kPi) - std::llround(T / (2 * kPi)));
        CHECK(frac * 2 * kPi < 0.11);
    }
    CHECK(rep.max_gap == doctest::Approx(2 * kPi).epsilon(0.05));
    CHECK(rep.relatively_dense);
    CHECK(rep.sup_defect < 0.1);
}

TEST_CASE("find_almost_periods on the two-tone almost periodic signal") {
    auto sig = sample_scalar([](double t) { return std::sin(t) + std::sin(kSqrt2 * t); },
                             800.0, 0.01);
    auto rep = find_almost_periods(sig, 0.2, 200.0, 0.01);
    CHECK(!rep.periods.empty());
    CHECK(rep.relatively_dense);
    // qualifying clusters sit at 24 pi and 58 pi; the 58 pi one is sharper
    const bool near_cluster = std::fabs(rep.best_period - 24 * kPi) < 0.3 ||
                              std::fabs(rep.best_period - 58 * kPi) < 0.3;
    CHECK(near_cluster);
    CHECK(rep.sup_defect < 0.2);
}

TEST_CASE("find_almost_periods: constant signals qualify everywhere") {
    auto sig = sample_scalar([](double) { return 3.0; }, 100.0, 0.05);
    auto rep = find_almost_periods(sig, 0.01, 25.0, 0.05);
    CHECK(rep.relatively_dense);
    CHECK(rep.periods.size() == 500);  // every scanned T
}

TEST_CASE("find_almost_periods enforces the window precondition") {
    auto sig = sample_scalar([](double t) { return std::sin(t); }, 10.0, 0.01);
    CHECK_THROWS_AS(find_almost_periods(sig, 0.1, 5.0, 0.01), WindowTooShort);
}

TEST_CASE("verify_aap accepts a pure AP signal with zero transient") {
    auto sig = sample_scalar([](double t) { return std::sin(t); }, 120.0, 0.02);
    auto rep = verify_aap(sig, 0.1, 0.0);
    CHECK(rep.is_aap);
}

TEST_CASE("verify_aap accepts AP plus an exponentially vanishing tail") {
    auto sig = sample_scalar([](double t) { return std::sin(t) + std::exp(-t); }, 160.0, 0.02);
    auto rep = verify_aap(sig, 0.05, 5.0);  // e^{-5} < 0.01 clears the ladder
    CHECK(rep.is_aap);
    CHECK(rep.defect_nonincreasing);
}

TEST_CASE("verify_aap rejects an unbounded signal") {
    auto sig = sample_scalar([](double t) { return t * std::sin(t); }, 160.0, 0.02);
    auto rep = verify_aap(sig, 0.05, 5.0);
    CHECK_FALSE(rep.is_aap);
}

TEST_CASE("verify_aap window precondition") {
    auto sig = sample_scalar([](double t) { return std::sin(t); }, 8.0, 0.02);
    CHECK_THROWS_AS(verify_aap(sig, 0.1, 5.0), WindowTooShort);
}

TEST_CASE("late-window defect of a decaying tail is non-increasing") {
    // decomposition proxy: at the true AP periods the windowed defect
    // tracks the tail magnitude, which shrinks as the window moves out
    auto sig = sample_scalar([](double t) { return std::sin(t) + 2.0 / (1.0 + t); }, 240.0, 0.02);
    auto rep = verify_aap(sig, 0.15, 20.0);
    REQUIRE(rep.window_defects.size() >= 3);
    for (std::size_t i = 1; i < rep.window_defects.size(); ++i)
        CHECK(rep.window_defects[i] <= rep.window_defects[i - 1] + 1e-3);
    CHECK(rep.is_aap);
}

TEST_CASE("aap report serializes") {
    auto sig = sample_scalar([](double t) { return std::sin(t); }, 120.0, 0.02);
    auto rep = verify_aap(sig, 0.1, 0.0);
    auto j = nlohmann::json::parse(rep.to_json());
    CHECK(j["is_aap"] == true);
    CHECK(j["periods"].contains("max_gap"));
}
