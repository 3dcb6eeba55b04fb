// Acceptance suite: runs every acceptance criterion at its pinned tolerance
// and prints one pass/fail line per criterion. Exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "volterra/cesaro.hpp"
#include "volterra/forcing.hpp"
#include "volterra/mean_square.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/solver.hpp"
#include "volterra/spectral.hpp"

using namespace volterra;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Check {
    std::vector<std::string> failures;
    int asserts = 0;

    void that(bool ok, const std::string& what) {
        ++asserts;
        if (!ok) failures.push_back(what);
    }
    void close(double value, double target, double tol, const std::string& what) {
        ++asserts;
        if (!(std::abs(value - target) <= tol)) {
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s: got %.8g, want %.8g +- %.2g", what.c_str(),
                          value, target, tol);
            failures.push_back(buf);
        }
    }
};

SignedMeasure nu_A() {
    SignedMeasure m;
    m.atoms = {{0.0, -1.0}};
    return m;
}

SignedMeasure nu_B() {
    SignedMeasure m;
    m.atoms = {{0.0, -2.0}};
    m.exp_density = {{1.0, 1.0}};
    return m;
}

SignedMeasure mu_D() {
    SignedMeasure m;
    m.atoms = {{1.0, -0.3}};
    m.support_bound = 1.0;
    return m;
}

SignedMeasure mu_C() {
    SignedMeasure m;
    m.atoms = {{1.0, -kPi / 2.0}};
    m.support_bound = 1.0;
    return m;
}

GridFunction sampled(double step, double horizon, const std::function<double(double)>& fn,
                     double t0 = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround((horizon - t0) / step)) + 1;
    return GridFunction::sample(t0, step, n, fn);
}

double bisect(const std::function<double(double)>& h, double lo, double hi) {
    double flo = h(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((h(mid) <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = h(mid);
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

void criterion_1(Check& c) {  // resolvent integral identities
    using clock = std::chrono::steady_clock;
    auto timed = [&c](const std::string& name, const std::function<IdentityReport()>& run) {
        const auto start = clock::now();
        IdentityReport rep = run();
        const double secs = std::chrono::duration<double>(clock::now() - start).count();
        c.that(rep.defined && rep.pass, name + " identities hold at 1e-3");
        c.that(rep.residual_integral_r <= 1e-3, name + " |int r + 1/mass| <= 1e-3");
        c.that(rep.residual_integral_r_prime <= 1e-3, name + " |int r' + 1| <= 1e-3");
        c.that(secs < 5.0, name + " runtime < 5 s");
    };
    timed("nu_A", [] {
        ResolventBundle b = differential_resolvent(nu_A(), 1e-3, 50.0);
        return check_integral_identities(b, nu_A(), 1e-3);
    });
    timed("nu_B", [] {
        ResolventBundle b = differential_resolvent(nu_B(), 1e-3, 50.0);
        return check_integral_identities(b, nu_B(), 1e-3);
    });
    timed("mu_D", [] {
        ResolventBundle b = fde_resolvent(mu_D(), 1e-3, 100.0);
        return check_integral_identities(b, mu_D(), 1e-3);
    });
}

void criterion_2(Check& c) {  // resolvent correctness against closed forms
    ResolventBundle a = differential_resolvent(nu_A(), 1e-3, 50.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.r.size() && a.r.time_at(i) <= 5.0; ++i) {
        worst = std::max(worst, std::abs(a.r[i] - std::exp(-a.r.time_at(i))));
    }
    c.that(worst <= 1e-5, "nu_A: max |r - e^{-t}| <= 1e-5 on [0,5]");

    // eigen-decomposition oracle for nu_B
    const double s5 = std::sqrt(5.0);
    const double l1 = (-3.0 + s5) / 2.0, l2 = (-3.0 - s5) / 2.0;
    const double ca = (-2.0 - l2) / (l1 - l2), cb = 1.0 - ca;
    const double oracle_r1 = ca * std::exp(l1) + cb * std::exp(l2);
    ResolventBundle b = differential_resolvent(nu_B(), 1e-3, 50.0);
    c.close(b.r.value_at(1.0), oracle_r1, 5e-4, "nu_B: r(1) against the eigen oracle");
    c.close(oracle_r1, 0.2414, 5e-4, "eigen oracle agrees with the quoted 0.2414");

    GridFunction kern = sampled(1e-3, 50.0, [](double t) { return std::exp(-2.0 * t); });
    ResolventBundle rk = integral_resolvent(kern, 1e-3, 50.0);
    worst = 0.0;
    for (std::size_t i = 0; i < rk.r.size() && rk.r.time_at(i) <= 5.0; ++i) {
        worst = std::max(worst, std::abs(rk.r[i] - std::exp(-rk.r.time_at(i))));
    }
    c.that(worst <= 1e-4, "k = e^{-2t}: max |r_k - e^{-t}| <= 1e-4 on [0,5]");
}

void criterion_3(Check& c) {  // forced means: halfline and finite memory
    const auto start = std::chrono::steady_clock::now();
    {
        Scenario s;
        s.kind = ScenarioKind::ide;
        s.measure = nu_B();
        s.step = 1e-2;
        s.horizon = 2000.0;
        s.forcing = sampled(s.step, s.horizon,
                            [](double t) { return 0.7 + std::exp(-t) * std::sin(t); });
        GridFunction x = solve_ide_direct(s);
        GridFunction xp = derivative_curve(s, x);
        CesaroReport xm = estimate_limit(x, 1e-2);
        CesaroReport dm = estimate_limit(xp, 1e-2);
        c.close(xm.estimate, 0.7, 2e-2, "ide: mean of x near -L/mass = 0.7");
        c.close(dm.estimate, 0.0, 2e-2, "ide: mean of x' near 0");
    }
    {
        Scenario s;
        s.kind = ScenarioKind::fde;
        s.measure = mu_D();
        s.step = 1e-2;
        s.horizon = 2000.0;
        s.forcing = sampled(s.step, s.horizon, [](double) { return 0.3; });
        s.history = sampled(s.step, 0.0, [](double) { return 1.0; }, -1.0);
        GridFunction x = solve_fde(s);
        CesaroReport xm = estimate_limit(x, 1e-2);
        c.close(xm.estimate, 1.0, 1e-2, "fde: mean of x near -L/mu([-tau,0]) = 1.0");
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.that(secs < 60.0, "runtime < 60 s");
}

void criterion_4(Check& c) {  // oscillatory forcing: interval route only
    const auto start = std::chrono::steady_clock::now();
    const double h = pathological_step_bound(1.0, 200.0);
    GridFunction f = pathological_forcing(1.0, 200.0, h);

    CesaroReport direct = estimate_limit(f, 1e-2);
    c.that(direct.verdict == Convergence::not_converged, "direct mean of f is not converged");
    c.that(direct.half_width > 0.5, "late-window spread > 0.5 (tracking -cos(t^2))");

    for (double theta : {0.25, 0.5, 1.0}) {
        CesaroReport map = estimate_limit(interval_average_map(f, theta), 1e-2);
        char name[64];
        std::snprintf(name, sizeof(name), "interval map theta = %.2f", theta);
        c.that(map.verdict == Convergence::converged, std::string(name) + " converged");
        c.close(map.estimate, 0.0, 1e-2, std::string(name) + " limit");
    }

    Scenario s;
    s.kind = ScenarioKind::ide;
    s.measure = nu_B();  // exponential density: the lift carries the long horizon
    s.step = h;
    s.horizon = 200.0;
    s.forcing = f;
    GridFunction x = solve_ide_direct(s);
    CesaroReport xm = estimate_limit(x, 2e-2);
    c.that(xm.verdict == Convergence::converged, "mean of x converged");
    c.close(xm.estimate, 0.0, 2e-2, "mean of x near 0");

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.that(secs < 120.0, "runtime < 120 s");
}

void criterion_5(Check& c) {  // decomposition f = f1 + f2
    struct Fixture {
        std::string name;
        GridFunction f;
        double limit;
        double tol;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({"constant", sampled(0.05, 2e5, [](double) { return 0.7; }), 0.7, 1e-6});
    fixtures.push_back({"abs_sine",
                        sampled(0.01, 2000.0, [](double t) { return std::abs(std::sin(t)); }),
                        2.0 / kPi, 2e-3});
    fixtures.push_back(
        {"oscillatory", pathological_forcing(1.0, 200.0, pathological_step_bound(1.0, 200.0)),
         0.0, 1e-2});

    for (const auto& fx : fixtures) {
        Decomposition d = decompose(fx.f, 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < fx.f.size(); ++i) {
            worst = std::max(worst, std::abs(d.f1[i] + d.f2[i] - fx.f[i]));
        }
        c.that(worst <= 1e-10, fx.name + ": f1 + f2 = f to 1e-10");
        const double f1_tol = fx.name == "constant" ? 1e-5 : fx.tol;
        CesaroReport f1_rep = estimate_limit(d.f1, f1_tol);
        c.close(f1_rep.estimate, fx.limit, f1_tol, fx.name + ": limit of f1 is L");
        CesaroReport F2_rep = estimate_limit(d.F2, fx.tol);
        c.close(F2_rep.estimate, fx.limit / 2.0, fx.tol == 2e-3 ? 5e-3 : fx.tol,
                fx.name + ": mean of F2 is L theta / 2");
    }
}

void criterion_6(Check& c) {  // convolution limits
    GridFunction cst = sampled(0.01, 2000.0, [](double) { return 0.7; });
    GridFunction asin = sampled(0.01, 2000.0, [](double t) { return std::abs(std::sin(t)); });
    GridFunction g = sampled(0.01, 2000.0, [](double t) { return std::exp(-t); });
    const std::vector<std::pair<std::string, const GridFunction*>> fs = {{"constant", &cst},
                                                                         {"abs_sine", &asin}};
    for (const auto& [name, f] : fs) {
        for (const auto& [mname, m] : {std::pair<std::string, SignedMeasure>{"nu_A", nu_A()},
                                       {"nu_B", nu_B()}}) {
            LimitCheck chk = convolution_limit_check(*f, m, 5e-3);
            c.that(std::abs(chk.measured - chk.predicted) <= 5e-3,
                   name + " * " + mname + ": limit matches L nu(R+)");
        }
        LimitCheck chk = convolution_limit_check(*f, g, 5e-3);
        c.that(std::abs(chk.measured - chk.predicted) <= 5e-3,
               name + " * e^{-t}: limit matches L int g");
    }
}

void criterion_7(Check& c) {  // spectral certification
    const auto start = std::chrono::steady_clock::now();
    RootSet rd = locate_roots(mu_D(), Rectangle{-3.0, 1.0, -10.0, 10.0});
    c.that(rd.count_certified && rd.roots.size() == 2, "mu_D: two certified roots in the strip");
    const double w0 = bisect([](double x) { return x + 0.3 * std::exp(-x); }, -1.0, 0.0);
    const double w1 = bisect([](double x) { return x + 0.3 * std::exp(-x); }, -2.0, -1.0);
    if (rd.roots.size() == 2) {
        c.close(rd.roots[0].location.real(), w0, 1e-6, "mu_D: dominant root vs bisection");
        c.close(rd.roots[1].location.real(), w1, 1e-6, "mu_D: second root vs bisection");
    }
    c.close(rd.v0, w0, 1e-6, "mu_D: v0 vs bisection");
    c.that(integrability_verdict(rd) == Integrability::yes, "mu_D: verdict yes");

    RootSet rc = locate_roots(mu_C(), Rectangle{-2.0, 1.0, -4.0, 4.0});
    c.that(rc.count_certified && rc.roots.size() == 2, "mu_C: the simple pair is certified");
    if (rc.roots.size() == 2) {
        c.close(std::abs(rc.roots[0].location.imag()), kPi / 2.0, 1e-8,
                "mu_C: |Im root| = pi/2");
    }
    c.close(rc.v0, 0.0, 1e-8, "mu_C: v0 = 0");
    c.that(integrability_verdict(rc) == Integrability::no, "mu_C: verdict no");

    DecayRateReport dd = decay_rate_check(rd, fde_resolvent(mu_D(), 1e-3, 40.0));
    c.that(dd.pass && std::abs(dd.fitted_slope - rd.v0) <= 0.05, "mu_D: decay slope = v0 +- 0.05");
    DecayRateReport dc = decay_rate_check(rc, fde_resolvent(mu_C(), 1e-2, 200.0));
    c.that(dc.pass && std::abs(dc.fitted_slope) <= 0.05, "mu_C: envelope slope 0 +- 0.05");

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.that(secs < 10.0, "runtime < 10 s");
}

void criterion_8(Check& c) {  // resonant forcing defeats the mean
    RootSet rs = locate_roots(mu_C(), Rectangle{-2.0, 1.0, -4.0, 4.0});
    ResonantMode mode = resonant_mode(mu_C(), rs);
    const std::complex<double> residue_oracle = 1.0 / std::complex<double>(1.0, kPi / 2.0);
    c.close(mode.c1, 2.0 * residue_oracle.real(), 1e-8, "c1 from the residue oracle");
    c.close(mode.k1, -2.0 * residue_oracle.imag(), 1e-8, "k1 from the residue oracle");
    c.close(mode.c1, 0.5768, 1e-4, "c1 matches the quoted value");
    c.close(mode.k1, 0.9060, 1e-4, "k1 matches the quoted value");

    Scenario s;
    s.kind = ScenarioKind::fde;
    s.measure = mu_C();
    s.step = 1e-2;
    s.horizon = 2000.0;
    s.forcing = resonant_forcing(mu_C(), rs, s.step, s.horizon);
    GridFunction x = solve_fde(s);  // psi = 0
    CesaroReport xm = estimate_limit(x, 1e-2);
    c.that(xm.half_width > 0.1, "late-window spread of the mean of x exceeds 0.1");
    c.that(xm.verdict == Convergence::not_converged, "x has no Cesàro limit");
}

void criterion_9(Check& c) {  // integral-equation contrast
    {
        Scenario s;
        s.kind = ScenarioKind::integral;
        s.step = 1e-2;
        s.horizon = 2000.0;
        s.kernel = sampled(s.step, s.horizon, [](double t) { return std::exp(-2.0 * t); });
        s.forcing = sampled(s.step, s.horizon, [](double t) { return std::abs(std::sin(t)); });
        ResolventBundle rk = integral_resolvent(s.kernel, s.step, s.horizon);
        GridFunction x = solve_integral_eq(s, rk);
        CesaroReport xm = estimate_limit(x, 1e-2);
        c.that(xm.verdict == Convergence::converged, "abs_sine forcing: mean of x converged");
        c.close(xm.estimate, 4.0 / kPi, 2e-2, "abs_sine forcing: mean of x near 4/pi");
    }
    {
        const double h = pathological_step_bound(1.0, 200.0);
        Scenario s;
        s.kind = ScenarioKind::integral;
        s.step = h;
        s.horizon = 200.0;
        s.kernel = sampled(s.step, 40.0, [](double t) { return std::exp(-2.0 * t); });
        s.forcing = pathological_forcing(1.0, 200.0, h);
        ResolventBundle rk = integral_resolvent(s.kernel, s.step, 40.0);
        GridFunction x = solve_integral_eq(s, rk);
        CesaroReport xm = estimate_limit(x, 1e-2);
        c.that(xm.verdict == Convergence::not_converged,
               "oscillatory forcing: mean of x not converged");
        c.that(xm.half_width > 0.3, "oscillatory forcing: late-window spread > 0.3");
    }
}

void criterion_10(Check& c) {  // positive-function equivalence
    GridFunction f = sampled(0.01, 2000.0, [](double t) { return std::abs(std::sin(t)); });
    PositiveEquivalenceReport rep = positive_equivalence_check(f, 5e-3);
    c.that(rep.pass && rep.equivalent, "abs_sine: both routes agree");
    c.close(rep.direct_route.estimate, 2.0 / kPi, 5e-3, "abs_sine: direct limit 2/pi");
    c.close(rep.interval_route.fitted_limit, 2.0 / kPi, 5e-3, "abs_sine: interval limit 2/pi");

    GridFunction ramp = sampled(0.01, 400.0, [](double t) { return t; });
    PositiveEquivalenceReport rr = positive_equivalence_check(ramp, 1e-2);
    c.that(!rr.side_condition_ok, "ramp: side condition violated");
    c.that(rr.note.find("side condition") != std::string::npos,
           "ramp: report names the side condition");
}

void criterion_11(Check& c) {  // mean square closed form
    Scenario s;
    s.kind = ScenarioKind::ide;
    s.measure = nu_A();
    s.step = 1e-3;
    s.horizon = 15.0;
    s.initial_value = 0.0;
    s.forcing = GridFunction::zeros(0.0, s.step, 15001);
    ResolventBundle b = differential_resolvent(s.measure, s.step, s.horizon);
    GridFunction x = solve_ide_direct(s);
    GridFunction sigma = sampled(s.step, s.horizon, [](double) { return 1.0; });
    GridFunction ms = mean_square_additive(x, b, sigma);
    c.close(ms.value_at(10.0), 0.5, 1e-4, "E[X^2](10) = 0.5 against the closed form");
}

void criterion_12(Check& c) {  // order of accuracy
    auto defect = [](double h) {
        Scenario s;
        s.kind = ScenarioKind::ide;
        s.measure = nu_B();
        s.step = h;
        s.horizon = 20.0;
        s.initial_value = 0.3;
        s.forcing = sampled(h, 20.0, [](double t) { return 0.7 + std::exp(-t) * std::sin(t); });
        GridFunction x = solve_ide_direct(s);
        return solution_defect(s, x);
    };
    const double ratio1 = defect(0.02) / defect(0.01);
    c.that(ratio1 >= 3.5, "ide defect drops by >= 3.5 when h halves (0.02 -> 0.01)");
    const double ratio2 = defect(0.01) / defect(0.005);
    c.that(ratio2 >= 3.5, "ide defect drops by >= 3.5 when h halves (0.01 -> 0.005)");

    auto fde_defect = [](double h) {
        Scenario s;
        s.kind = ScenarioKind::fde;
        s.measure = mu_D();
        s.step = h;
        s.horizon = 20.0;
        s.forcing = sampled(h, 20.0, [](double t) { return 0.3 + 0.1 * std::sin(t); });
        s.history = sampled(h, 0.0, [](double t) { return std::cos(t); }, -1.0);
        GridFunction x = solve_fde(s);
        return solution_defect(s, x);
    };
    c.that(fde_defect(0.02) / fde_defect(0.01) >= 3.5, "fde defect drops by >= 3.5");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "resolvent integral identities (nu_A, nu_B, mu_D)", criterion_1},
        {2, "resolvent correctness against closed forms", criterion_2},
        {3, "forced means settle at -L/mass (halfline and finite memory)", criterion_3},
        {4, "interval-average route survives oscillatory forcing", criterion_4},
        {5, "decomposition f = f1 + f2 with the averaged-integral limits", criterion_5},
        {6, "convolution limits L nu(R+) and L int g", criterion_6},
        {7, "characteristic-root certification and decay rates", criterion_7},
        {8, "resonant forcing defeats the Cesàro limit when v0 = 0", criterion_8},
        {9, "integral equations follow the forcing, fragile and faithful", criterion_9},
        {10, "positive-function equivalence with the side condition", criterion_10},
        {11, "additive-noise mean square closed form", criterion_11},
        {12, "second-order accuracy under step halving", criterion_12},
    };

    int failed = 0;
    for (const auto& crit : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            crit.fn(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = check.failures.empty();
        std::printf("[%s] criterion %2d: %s (%d checks, %.1f s)\n", ok ? "PASS" : "FAIL",
                    crit.id, crit.name, check.asserts, secs);
        for (const auto& f : check.failures) std::printf("         - %s\n", f.c_str());
        if (!ok) ++failed;
    }
    if (failed > 0) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
