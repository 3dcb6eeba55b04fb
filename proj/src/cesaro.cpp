#include "volterra/cesaro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace volterra {

namespace {

struct WindowStats {
    double mean = 0.0;
    double spread = 0.0;  // (max - min) / 2
    std::size_t count = 0;
};

WindowStats window_stats(const GridFunction& curve, double t_from, double t_to) {
    WindowStats ws;
    double lo = 0.0, hi = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double t = curve.time_at(i);
        if (t < t_from || t > t_to) continue;
        const double v = curve[i];
        if (ws.count == 0) {
            lo = hi = v;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        sum += v;
        ++ws.count;
    }
    if (ws.count > 0) {
        ws.mean = sum / static_cast<double>(ws.count);
        ws.spread = 0.5 * (hi - lo);
    }
    return ws;
}

std::size_t theta_nodes(const GridFunction& f, double theta) {
    if (!(theta > 0.0) || theta > 1.0 + 1e-12) {
        throw std::invalid_argument("theta must lie in (0, 1]");
    }
    const double pos = theta / f.step();
    const double snapped = std::round(pos);
    if (snapped < 1.0) throw std::invalid_argument("theta is below the grid resolution");
    if (std::abs(pos - snapped) >= 0.5 - 1e-9) {
        throw std::invalid_argument("theta sits between grid nodes; cannot snap");
    }
    return static_cast<std::size_t>(snapped);
}

}  // namespace

const char* to_string(Convergence v) {
    switch (v) {
        case Convergence::converged: return "converged";
        case Convergence::not_converged: return "not_converged";
        default: return "inconclusive";
    }
}

const char* to_string(PanelVerdict v) {
    switch (v) {
        case PanelVerdict::pass: return "pass";
        case PanelVerdict::fail: return "fail";
        case PanelVerdict::inconclusive: return "inconclusive";
        default: return "not_applicable";
    }
}

CesaroReport estimate_limit(const GridFunction& f, double tol) {
    if (f.start_time() != 0.0) {
        throw std::invalid_argument("estimate_limit: signal must start at t = 0");
    }
    const double T = f.horizon();
    if (T < 100.0) {
        throw std::invalid_argument("estimate_limit: horizon too short (need T >= 100)");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("estimate_limit: tolerance must be positive");
    CesaroReport rep;
    rep.tolerance = tol;
    rep.curve = running_mean(f);
    const WindowStats late = window_stats(rep.curve, 0.5 * T, T);
    const WindowStats prev = window_stats(rep.curve, 0.25 * T, 0.5 * T);
    rep.estimate = late.mean;
    rep.half_width = late.spread;
    rep.previous_half_width = prev.spread;
    if (late.spread <= tol) {
        rep.verdict = Convergence::converged;
    } else if (late.spread >= 10.0 * tol && prev.spread >= 10.0 * tol) {
        rep.verdict = Convergence::not_converged;
    } else {
        rep.verdict = Convergence::inconclusive;
    }
    return rep;
}

GridFunction interval_average_map(const GridFunction& f, double theta) {
    const std::size_t m = theta_nodes(f, theta);
    if (m >= f.size()) throw std::invalid_argument("interval_average_map: theta exceeds horizon");
    GridFunction F = running_integral(f);
    std::vector<double> out(f.size() - m);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = F[i + m] - F[i];
    return GridFunction(f.start_time(), f.step(), std::move(out));
}

Decomposition decompose(const GridFunction& f, double theta) {
    const std::size_t m = theta_nodes(f, theta);
    const double theta_snapped = f.step() * static_cast<double>(m);
    GridFunction F = running_integral(f);
    std::vector<double> f1(f.size()), f2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double below = (i >= m) ? F[i - m] : 0.0;  // zero extension of f
        f1[i] = (F[i] - below) / theta_snapped;
        f2[i] = f[i] - f1[i];
    }
    Decomposition d;
    d.theta = theta_snapped;
    d.f1 = GridFunction(f.start_time(), f.step(), std::move(f1));
    d.f2 = GridFunction(f.start_time(), f.step(), std::move(f2));
    d.F2 = running_integral(d.f2);
    return d;
}

AdditivityReport check_additivity(const GridFunction& f, std::span<const double> thetas,
                                  double tol) {
    if (thetas.empty()) throw std::invalid_argument("check_additivity: no thetas given");
    AdditivityReport rep;
    rep.verdict = Convergence::converged;
    double slope_sum = 0.0;
    for (double theta : thetas) {
        AdditivityEntry e;
        e.theta = f.step() * static_cast<double>(theta_nodes(f, theta));  // snapped
        e.map_report = estimate_limit(interval_average_map(f, theta), tol);
        e.slope = e.map_report.estimate / e.theta;
        slope_sum += e.slope;
        if (e.map_report.verdict != Convergence::converged) {
            rep.verdict = e.map_report.verdict;
        }
        rep.entries.push_back(std::move(e));
    }
    rep.fitted_limit = slope_sum / static_cast<double>(thetas.size());
    if (rep.verdict != Convergence::converged) {
        rep.pass = false;
        return rep;
    }
    rep.pass = true;
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.entries.size(); ++j) {
            const auto& a = rep.entries[i];
            const auto& b = rep.entries[j];
            const double dev = std::abs(a.slope - b.slope);
            rep.max_pairwise_deviation = std::max(rep.max_pairwise_deviation, dev);
            const double budget = a.map_report.half_width / a.theta +
                                  b.map_report.half_width / b.theta + tol;
            if (dev > budget) rep.pass = false;
        }
    }
    return rep;
}

LimitCheck convolution_limit_check(const GridFunction& f, const SignedMeasure& m, double tol) {
    LimitCheck chk;
    chk.tolerance = tol;
    CesaroReport base = estimate_limit(f, tol);
    if (base.verdict != Convergence::converged) {
        throw std::invalid_argument("convolution_limit_check: f has no converged Cesàro limit");
    }
    chk.predicted = base.estimate * m.total_mass();
    CesaroReport conv = estimate_limit(convolve_measure(f, m), tol);
    chk.measured = conv.estimate;
    chk.pass = std::abs(chk.measured - chk.predicted) <= tol + base.half_width + conv.half_width;
    return chk;
}

LimitCheck convolution_limit_check(const GridFunction& f, const GridFunction& g, double tol) {
    LimitCheck chk;
    chk.tolerance = tol;
    CesaroReport base = estimate_limit(f, tol);
    if (base.verdict != Convergence::converged) {
        throw std::invalid_argument("convolution_limit_check: f has no converged Cesàro limit");
    }
    chk.predicted = base.estimate * integrate(g, 0.0, g.horizon());
    CesaroReport conv = estimate_limit(convolve(f, g), tol);
    chk.measured = conv.estimate;
    chk.pass = std::abs(chk.measured - chk.predicted) <= tol + base.half_width + conv.half_width;
    return chk;
}

bool TheoremReport::all_passed() const {
    return std::all_of(panels.begin(), panels.end(), [](const Panel& p) {
        return p.verdict != PanelVerdict::fail;
    });
}

namespace {

Panel make_value_panel(std::string id, double predicted, double measured, double tol,
                       bool hypotheses_ok, std::string note = "") {
    Panel p;
    p.id = std::move(id);
    p.predicted = predicted;
    p.measured = measured;
    p.tolerance = tol;
    p.note = std::move(note);
    if (!hypotheses_ok) {
        p.verdict = PanelVerdict::inconclusive;
    } else {
        p.verdict = std::abs(measured - predicted) <= tol ? PanelVerdict::pass : PanelVerdict::fail;
    }
    return p;
}

}  // namespace

TheoremReport verify_theorem(const Scenario& s, const GridFunction& x, const GridFunction* xprime,
                             const ResolventBundle* bundle, const VerifyOptions& opt) {
    TheoremReport rep;

    ResolventBundle local;
    if (bundle == nullptr) {
        switch (s.kind) {
            case ScenarioKind::ide:
                local = differential_resolvent(s.measure, s.step, s.horizon);
                break;
            case ScenarioKind::fde:
                local = fde_resolvent(s.measure, s.step, s.horizon);
                break;
            case ScenarioKind::integral:
                local = integral_resolvent(s.kernel, s.step, s.horizon);
                break;
        }
        bundle = &local;
    }
    rep.resolvent_verdict = bundle->verdict;
    const bool hyp = bundle->verdict == Integrability::yes;
    const std::string hyp_note =
        hyp ? "" : "resolvent integrability is not established; hypothesis unmet";

    CesaroReport x_rep = estimate_limit(x, opt.cesaro_tolerance);

    if (s.kind == ScenarioKind::integral) {
        CesaroReport f_rep = estimate_limit(s.forcing, opt.cesaro_tolerance);
        Panel equiv;
        equiv.id = "integral_equivalence";
        equiv.tolerance = opt.mean_tolerance;
        const bool f_conv = f_rep.verdict == Convergence::converged;
        const bool x_conv = x_rep.verdict == Convergence::converged;
        const bool f_div = f_rep.verdict == Convergence::not_converged;
        const bool x_div = x_rep.verdict == Convergence::not_converged;
        if (!hyp) {
            equiv.verdict = PanelVerdict::inconclusive;
            equiv.note = hyp_note;
        } else if (f_conv) {
            const double predicted = f_rep.estimate * (1.0 + bundle->integral_r);
            equiv.predicted = predicted;
            equiv.measured = x_rep.estimate;
            const bool value_ok = std::abs(x_rep.estimate - predicted) <= opt.mean_tolerance;
            if (x_conv && value_ok) {
                equiv.verdict = PanelVerdict::pass;
            } else if (x_div || !value_ok) {
                equiv.verdict = PanelVerdict::fail;
            } else {
                equiv.verdict = PanelVerdict::inconclusive;
            }
            equiv.note = "forcing converged; solution limit checked against L (1 + int r_k)";
        } else if (f_div) {
            equiv.verdict = x_div ? PanelVerdict::pass : PanelVerdict::fail;
            equiv.note = "forcing diverges; solution mean must diverge with it";
            equiv.measured = x_rep.half_width;
        } else {
            equiv.verdict = PanelVerdict::inconclusive;
            equiv.note = "forcing convergence is inconclusive at this horizon";
        }
        rep.panels.push_back(std::move(equiv));
        return rep;
    }

    const double mass = s.measure.total_mass();
    const char* mass_name = s.kind == ScenarioKind::ide ? "nu(R+)" : "mu([-tau,0])";

    // interval-average route
    AdditivityReport add = check_additivity(s.forcing, opt.thetas, opt.interval_tolerance);
    {
        Panel maps;
        maps.id = "interval_average_limits";
        maps.measured = add.fitted_limit;
        maps.predicted = add.fitted_limit;
        maps.tolerance = opt.interval_tolerance;
        maps.verdict = add.pass ? PanelVerdict::pass
                                : (add.verdict == Convergence::converged ? PanelVerdict::fail
                                                                         : PanelVerdict::inconclusive);
        maps.note = "common slope of interval-average limits across thetas";
        rep.panels.push_back(std::move(maps));
    }
    if (mass == 0.0) {
        Panel p;
        p.id = "solution_limit_from_interval_route";
        p.verdict = PanelVerdict::inconclusive;
        p.note = std::string("total mass ") + mass_name + " is zero; the limit is undefined";
        rep.panels.push_back(std::move(p));
    } else if (add.verdict == Convergence::converged) {
        rep.panels.push_back(make_value_panel(
            "solution_limit_from_interval_route", -add.fitted_limit / mass, x_rep.estimate,
            opt.mean_tolerance, hyp, hyp ? "" : hyp_note));
    } else {
        Panel p;
        p.id = "solution_limit_from_interval_route";
        p.verdict = PanelVerdict::inconclusive;
        p.note = "interval-average maps did not converge";
        rep.panels.push_back(std::move(p));
    }

    // direct forcing route (with the derivative mean)
    CesaroReport f_rep = estimate_limit(s.forcing, opt.cesaro_tolerance);
    if (f_rep.verdict == Convergence::converged && mass != 0.0) {
        rep.panels.push_back(make_value_panel("solution_limit_from_forcing_limit",
                                              -f_rep.estimate / mass, x_rep.estimate,
                                              opt.mean_tolerance, hyp, hyp ? "" : hyp_note));
        if (xprime != nullptr) {
            CesaroReport dx_rep = estimate_limit(*xprime, opt.cesaro_tolerance);
            rep.panels.push_back(make_value_panel("derivative_mean", 0.0, dx_rep.estimate,
                                                  opt.mean_tolerance, hyp, hyp ? "" : hyp_note));
        }
    } else {
        Panel p;
        p.id = "solution_limit_from_forcing_limit";
        p.verdict = PanelVerdict::not_applicable;
        p.note = f_rep.verdict == Convergence::not_converged
                     ? "forcing has no Cesàro limit (direct route does not apply)"
                     : "forcing convergence inconclusive";
        rep.panels.push_back(std::move(p));
    }
    return rep;
}

PositiveEquivalenceReport positive_equivalence_check(const GridFunction& f, double tol) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0.0) {
            throw std::invalid_argument("positive_equivalence_check: f must be nonnegative");
        }
    }
    PositiveEquivalenceReport rep;
    const std::vector<double> thetas{0.25, 0.5, 1.0};
    rep.interval_route = check_additivity(f, thetas, tol);

    // side condition: (1/t) int_t^{t+1} f -> 0. A quantity still decaying like
    // 1/t is accepted when it clearly shrinks across the dyadic windows; what
    // must be rejected is a nonzero limit (ramp-like growth of f).
    GridFunction window = interval_average_map(f, 1.0);
    const double T = window.horizon();
    double late_sum = 0.0, prev_sum = 0.0;
    std::size_t late_count = 0, prev_count = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double t = window.time_at(i);
        if (t <= 0.0) continue;
        const double v = std::abs(window[i]) / t;
        if (t >= 0.5 * T) {
            late_sum += v;
            ++late_count;
        } else if (t >= 0.25 * T) {
            prev_sum += v;
            ++prev_count;
        }
    }
    const double late = late_count ? late_sum / static_cast<double>(late_count) : 0.0;
    const double prev = prev_count ? prev_sum / static_cast<double>(prev_count) : 0.0;
    rep.side_condition_value = late;
    rep.side_condition_ok = late <= tol || late <= 0.8 * prev;

    rep.direct_route = estimate_limit(f, tol);
    const bool route_i = rep.interval_route.pass && rep.side_condition_ok;
    const bool route_ii = rep.direct_route.verdict == Convergence::converged;
    if (route_i && route_ii) {
        rep.equivalent =
            std::abs(rep.interval_route.fitted_limit - rep.direct_route.estimate) <=
            2.0 * tol;
        rep.pass = rep.equivalent;
        rep.note = "both routes converge; limits compared";
    } else if (!route_i && !route_ii) {
        rep.equivalent = true;
        rep.pass = true;
        rep.note = rep.side_condition_ok
                       ? "neither route converges; equivalence holds vacuously"
                       : "side condition violated; no equivalence claim is made";
    } else if (route_i) {
        rep.pass = false;
        rep.note = "interval route converged but the direct mean did not";
    } else {
        rep.pass = !rep.side_condition_ok;
        rep.note = rep.side_condition_ok
                       ? "direct mean converged but the interval route did not"
                       : "side condition violated; no equivalence claim is made";
    }
    return rep;
}

}  // namespace volterra
