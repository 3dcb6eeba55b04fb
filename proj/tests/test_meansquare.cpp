#include <doctest.h>

#include <cmath>

#include "volterra/cesaro.hpp"
#include "volterra/mean_square.hpp"
#include "volterra/solver.hpp"

using namespace volterra;

namespace {

SignedMeasure nu_A() {
    SignedMeasure m;
    m.atoms = {{0.0, -1.0}};
    return m;
}

Scenario base_scenario(double xi, double step, double horizon) {
    Scenario s;
    s.kind = ScenarioKind::ide;
    s.measure = nu_A();
    s.step = step;
    s.horizon = horizon;
    s.initial_value = xi;
    const auto n = static_cast<std::size_t>(std::llround(horizon / step)) + 1;
    s.forcing = GridFunction::zeros(0.0, step, n);
    return s;
}

GridFunction ones(double step, std::size_t n) {
    return GridFunction::sample(0.0, step, n, [](double) { return 1.0; });
}

}  // namespace

TEST_SUITE("meansquare") {

TEST_CASE("zero noise reduces to the squared deterministic solution") {
    Scenario s = base_scenario(0.7, 1e-2, 20.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction ms = mean_square_additive(x, b, GridFunction::zeros(0.0, s.step, x.size()));
    for (std::size_t i = 0; i < ms.size(); i += 100) {
        CHECK(ms[i] == doctest::Approx(x[i] * x[i]).epsilon(1e-12));
    }
}

TEST_CASE("unit noise: E[X^2](t) = (1 - e^{-2t})/2 for xi = 0") {
    Scenario s = base_scenario(0.0, 1e-3, 15.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction ms = mean_square_additive(x, b, ones(s.step, x.size()));
    CHECK(ms.value_at(10.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(ms.value_at(1.0) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-4));
}

TEST_CASE("unit noise with xi = 1: boundary value and closed form") {
    Scenario s = base_scenario(1.0, 1e-3, 12.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction ms = mean_square_additive(x, b, ones(s.step, x.size()));
    CHECK(ms[0] == doctest::Approx(1.0));
    const double t = 3.0;
    const double expected = std::exp(-2.0 * t) + (1.0 - std::exp(-2.0 * t)) / 2.0;
    CHECK(ms.value_at(t) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("nonnegativity and monotonicity in sigma") {
    Scenario s = base_scenario(0.4, 1e-2, 30.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction sig1 = GridFunction::sample(0.0, s.step, x.size(),
                                             [](double t) { return 0.5 + 0.4 * std::sin(t); });
    GridFunction sig2 = GridFunction::sample(0.0, s.step, x.size(),
                                             [](double t) { return 1.0 + 0.4 * std::sin(t); });
    GridFunction ms1 = mean_square_additive(x, b, sig1);
    GridFunction ms2 = mean_square_additive(x, b, sig2);
    for (std::size_t i = 0; i < ms1.size(); ++i) {
        CHECK(ms1[i] >= x[i] * x[i] - 1e-12);
        CHECK(ms2[i] >= ms1[i] - 1e-12);
    }
}

TEST_CASE("Cesàro mean of the noise term settles at S * int r^2") {
    // sigma = 1 has Cesàro limit S = 1 for sigma^2; int_0^inf e^{-2t} dt = 1/2
    Scenario s = base_scenario(0.0, 1e-2, 400.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction ms = mean_square_additive(x, b, ones(s.step, x.size()));
    CesaroReport rep = estimate_limit(ms, 5e-3);
    CHECK(rep.verdict == Convergence::converged);
    CHECK(rep.estimate == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("grid mismatch is rejected") {
    Scenario s = base_scenario(0.0, 1e-2, 10.0);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction bad = GridFunction::zeros(0.0, 2e-2, 100);
    CHECK_THROWS_AS(mean_square_additive(x, b, bad), std::invalid_argument);
}

}  // TEST_SUITE
