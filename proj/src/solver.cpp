#include "volterra/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stepping.hpp"

namespace volterra {

namespace {

std::size_t node_count_for(const Scenario& s) {
    return static_cast<std::size_t>(std::llround(s.horizon / s.step)) + 1;
}

std::span<const double> forcing_span(const Scenario& s, std::size_t n) {
    if (s.forcing.empty()) return {};
    if (std::abs(s.forcing.step() - s.step) > 1e-12 * s.step || s.forcing.start_time() != 0.0 ||
        s.forcing.size() < n) {
        throw std::invalid_argument("scenario: forcing is not sampled on the scenario grid");
    }
    return s.forcing.values().subspan(0, n);
}

const GridFunction* history_or_null(const Scenario& s) {
    return s.history.empty() ? nullptr : &s.history;
}

GridFunction to_grid(std::vector<double> values, double step) {
    return GridFunction(0.0, step, std::move(values));
}

void check_bundle_grid(const Scenario& s, const ResolventBundle& b, std::size_t n) {
    if (std::abs(b.r.step() - s.step) > 1e-12 * s.step || b.r.size() < n) {
        throw std::invalid_argument("scenario: resolvent bundle grid does not match");
    }
}

}  // namespace

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::ide: return "ide";
        case ScenarioKind::fde: return "fde";
        default: return "integral";
    }
}

SolverOverflow::SolverOverflow(double t)
    : std::runtime_error("solver: solution overflowed (unstable kernel) at t = " +
                         std::to_string(t)),
      blow_up_time(t) {}

void Scenario::validate() const {
    if (!(step > 0.0) || !(horizon > step)) {
        throw std::invalid_argument("scenario: need step > 0 and horizon > step");
    }
    switch (kind) {
        case ScenarioKind::ide:
            measure.validate();
            if (!measure.is_halfline()) {
                throw std::invalid_argument("scenario: ide measure must live on the halfline");
            }
            break;
        case ScenarioKind::fde: {
            measure.validate();
            if (!measure.support_bound) {
                throw std::invalid_argument("scenario: fde measure needs a support bound");
            }
            if (!history.empty()) {
                const double tau = *measure.support_bound;
                if (history.start_time() > -tau + 1e-9 && tau > 0.0) {
                    throw std::invalid_argument("scenario: history does not cover [-tau, 0]");
                }
                if (std::abs(history.horizon()) > 1e-9) {
                    throw std::invalid_argument("scenario: history must end at t = 0");
                }
            }
            break;
        }
        case ScenarioKind::integral:
            if (kernel.empty()) throw std::invalid_argument("scenario: integral kind needs a kernel");
            break;
    }
}

GridFunction solve_ide_direct(const Scenario& s) {
    s.validate();
    if (s.kind != ScenarioKind::ide) throw std::invalid_argument("solve_ide_direct: kind != ide");
    const std::size_t n = node_count_for(s);
    auto pm = detail::PreparedMeasure::build(s.measure, s.step, s.horizon, /*allow_lift=*/true);
    pm.check_step_budget(n);
    auto out = detail::step_linear_volterra(pm, nullptr, s.initial_value, forcing_span(s, n), n);
    if (out.blow_up_time) throw SolverOverflow(*out.blow_up_time);
    return to_grid(std::move(out.values), s.step);
}

GridFunction solve_ide_voc(const Scenario& s, const ResolventBundle& b) {
    s.validate();
    if (s.kind != ScenarioKind::ide) throw std::invalid_argument("solve_ide_voc: kind != ide");
    const std::size_t n = node_count_for(s);
    check_bundle_grid(s, b, n);
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = b.r[i] * s.initial_value;
    if (!s.forcing.empty()) {
        GridFunction conv = convolve(b.r, s.forcing);
        for (std::size_t i = 0; i < n && i < conv.size(); ++i) x[i] += conv[i];
    }
    return to_grid(std::move(x), s.step);
}

GridFunction solve_fde(const Scenario& s) {
    s.validate();
    if (s.kind != ScenarioKind::fde) throw std::invalid_argument("solve_fde: kind != fde");
    const std::size_t n = node_count_for(s);
    auto pm = detail::PreparedMeasure::build(s.measure, s.step, s.horizon, /*allow_lift=*/true);
    const GridFunction* psi = history_or_null(s);
    const double x0 = psi ? psi->value_at(0.0) : 0.0;
    auto out = detail::step_linear_volterra(pm, psi, x0, forcing_span(s, n), n);
    if (out.blow_up_time) throw SolverOverflow(*out.blow_up_time);
    return to_grid(std::move(out.values), s.step);
}

GridFunction solve_fde_voc(const Scenario& s, const ResolventBundle& b) {
    s.validate();
    if (s.kind != ScenarioKind::fde) throw std::invalid_argument("solve_fde_voc: kind != fde");
    const std::size_t n = node_count_for(s);
    check_bundle_grid(s, b, n);
    const double h = s.step;
    const double tau = *s.measure.support_bound;
    const auto m = static_cast<std::size_t>(std::llround(tau / h));
    const GridFunction* psi = history_or_null(s);
    const double psi0 = psi ? psi->value_at(0.0) : 0.0;

    // fold the history and the measure into a kernel g on [0, tau]:
    // g(w) = sum_{a_j >= w} w_j psi(w - a_j) + int_w^tau d(a) psi(w - a) da,
    // so that x0 = r psi(0) + r * g.
    std::vector<double> g(n, 0.0);
    if (psi != nullptr && m > 0) {
        std::vector<double> dens = sample_density(s.measure, h, m + 1);
        dens.resize(m + 1, 0.0);
        for (std::size_t i = 0; i <= m; ++i) {
            const double w = h * static_cast<double>(i);
            double acc = 0.0;
            for (const auto& a : s.measure.atoms) {
                if (a.location >= w - 1e-12 && a.location > 0.0) {
                    acc += a.weight * psi->value_at(std::min(0.0, w - a.location));
                }
            }
            if (s.measure.has_density()) {
                double q = 0.0;
                for (std::size_t k = i; k <= m; ++k) {
                    const double wt = (k == i || k == m) ? 0.5 : 1.0;
                    q += wt * dens[k] * psi->value_at(std::min(0.0, w - h * static_cast<double>(k)));
                }
                acc += h * q;
            }
            g[i] = acc;
        }
    }
    GridFunction conv_g = convolve(b.r, GridFunction(0.0, h, std::move(g)));

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = b.r[i] * psi0 + conv_g[i];
    if (!s.forcing.empty()) {
        GridFunction conv_f = convolve(b.r, s.forcing);
        for (std::size_t i = 0; i < n && i < conv_f.size(); ++i) x[i] += conv_f[i];
    }
    return to_grid(std::move(x), s.step);
}

GridFunction solve_integral_eq(const Scenario& s, const ResolventBundle& rk) {
    s.validate();
    if (s.kind != ScenarioKind::integral) {
        throw std::invalid_argument("solve_integral_eq: kind != integral");
    }
    const std::size_t n = node_count_for(s);
    if (std::abs(rk.r.step() - s.step) > 1e-12 * s.step) {
        throw std::invalid_argument("solve_integral_eq: resolvent grid mismatch");
    }
    forcing_span(s, n);  // grid check
    GridFunction r = rk.r;
    if (r.size() < n) {
        // zero-extending a decayed resolvent is fine; anything else is an error
        if (!(rk.verdict == Integrability::yes && rk.tail_estimate < 1e-8)) {
            throw std::invalid_argument(
                "solve_integral_eq: resolvent horizon too short for the scenario");
        }
        std::vector<double> padded(r.values().begin(), r.values().end());
        padded.resize(n, 0.0);
        r = GridFunction(0.0, s.step, std::move(padded));
    }
    GridFunction conv = convolve(r, s.forcing);
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = s.forcing[i] + conv[i];
    return to_grid(std::move(x), s.step);
}

GridFunction solve_integral_direct(const Scenario& s) {
    s.validate();
    if (s.kind != ScenarioKind::integral) {
        throw std::invalid_argument("solve_integral_direct: kind != integral");
    }
    const std::size_t n = node_count_for(s);
    auto f = forcing_span(s, n);
    const double h = s.step;
    const GridFunction& k = s.kernel;
    if (std::abs(k.step() - h) > 1e-12 * h) {
        throw std::invalid_argument("solve_integral_direct: kernel grid mismatch");
    }
    const double diag = 1.0 - 0.5 * h * k[0];
    if (std::abs(diag) < 1e-8) {
        throw std::invalid_argument("solve_integral_direct: implicit step nearly singular");
    }
    double kmax = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) kmax = std::max(kmax, std::abs(k[i]));
    std::size_t window = k.size() - 1;
    while (window > 1 && std::abs(k[window]) < 1e-14 * kmax) --window;

    auto kv = [&](std::size_t i) -> double { return i < k.size() ? k[i] : 0.0; };
    std::vector<double> x(n, 0.0);
    x[0] = f.empty() ? 0.0 : f[0];
    for (std::size_t i = 1; i < n; ++i) {
        double ssum = 0.5 * kv(i) * x[0];
        const std::size_t jmin = (i > window) ? i - window : 1;
        for (std::size_t j = jmin; j < i; ++j) ssum += kv(i - j) * x[j];
        const double fi = f.empty() ? 0.0 : f[i];
        x[i] = (fi + h * ssum) / diag;
        if (!std::isfinite(x[i]) || std::abs(x[i]) > 1e150) {
            throw SolverOverflow(h * static_cast<double>(i));
        }
    }
    return to_grid(std::move(x), s.step);
}

GridFunction derivative_curve(const Scenario& s, const GridFunction& x) {
    s.validate();
    if (s.kind == ScenarioKind::integral) {
        throw std::invalid_argument("derivative_curve: integral scenarios have no derivative form");
    }
    auto pm = detail::PreparedMeasure::build(s.measure, s.step, s.horizon, /*allow_lift=*/true);
    const GridFunction* psi = s.kind == ScenarioKind::fde ? history_or_null(s) : nullptr;
    auto d = detail::derivative_nodes(pm, s.measure, x, psi, forcing_span(s, x.size()));
    return to_grid(std::move(d), s.step);
}

double solution_defect(const Scenario& s, const GridFunction& x) {
    GridFunction d = derivative_curve(s, x);
    GridFunction cd = centered_derivative(x);
    auto pm = detail::PreparedMeasure::build(s.measure, s.step, s.horizon, false);
    auto lags = detail::activation_lags(pm);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (std::binary_search(lags.begin(), lags.end(), i)) continue;
        worst = std::max(worst, std::abs(cd[i] - d[i]));
    }
    return worst;
}

}  // namespace volterra
