#include "stepping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace volterra::detail {

namespace {

constexpr double kOverflowGuard = 1e150;

std::size_t lag_on_grid(double location, double step, const char* what) {
    const double pos = location / step;
    const double snapped = std::round(pos);
    if (std::abs(pos - snapped) >= 0.5 - 1e-9) {
        throw std::invalid_argument(std::string(what) +
                                    ": location sits between grid nodes; cannot snap");
    }
    return static_cast<std::size_t>(snapped);
}

}  // namespace

PreparedMeasure PreparedMeasure::build(const SignedMeasure& m, double step, double horizon,
                                       bool allow_lift) {
    m.validate();
    if (!m.is_halfline()) {
        throw std::invalid_argument("stepping: measure must live on the halfline (reflect first)");
    }
    PreparedMeasure pm;
    pm.step = step;
    pm.bounded_memory = m.support_bound.has_value();
    if (pm.bounded_memory) {
        const double tau = *m.support_bound;
        const double pos = tau / step;
        if (std::abs(pos - std::round(pos)) > 1e-9 * std::max(1.0, pos)) {
            throw std::invalid_argument(
                "stepping: support bound tau must be an integer multiple of the step");
        }
    }
    for (const auto& a : m.atoms) {
        if (std::abs(a.weight) * step > 0.5) {
            throw std::invalid_argument("stepping: step too large for stiffest atom (|w| h > 0.5)");
        }
        const std::size_t lag = lag_on_grid(a.location, step, "stepping atom");
        if (lag == 0) {
            pm.weight_at_zero += a.weight;
        } else {
            pm.delayed_atoms.emplace_back(lag, a.weight);
        }
    }
    // the lift integrates over the whole history, so it cannot represent a
    // density truncated at a support bound
    if (!m.exp_density.empty() && allow_lift && !pm.bounded_memory) {
        pm.lift = m.exp_density;
    } else if (m.has_density()) {
        const auto max_nodes =
            static_cast<std::size_t>(std::ceil(horizon / step)) + 1;
        pm.density = sample_density(m, step, max_nodes);
    }
    return pm;
}

void PreparedMeasure::check_step_budget(std::size_t node_count) const {
    if (node_count > kDirectHistoryLimit && !density.empty() && !bounded_memory) {
        throw std::invalid_argument(
            "stepping: grid too large for direct history convolution; give the density as an "
            "exponential sum (Markovian lift) or use the variation-of-constants route");
    }
}

std::vector<std::size_t> activation_lags(const PreparedMeasure& pm) {
    std::vector<std::size_t> lags;
    for (const auto& [lag, w] : pm.delayed_atoms) lags.push_back(lag);
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

namespace {

struct Reader {
    const std::vector<double>* values;
    const GridFunction* history;  // nullptr -> zero extension
    double step;

    // value of the extended solution at node index i (possibly negative)
    double at(long long i) const {
        if (i >= 0) return (*values)[static_cast<std::size_t>(i)];
        if (history == nullptr) return 0.0;
        return history->value_at(static_cast<double>(i) * step);
    }

    // left limit at node 0: the extension side of the possible jump of x at 0
    double left_limit_at_zero() const {
        if (history == nullptr) return 0.0;
        return history->value_at(0.0);
    }
};

// Trapezoid of the density convolution at node n; `top` overrides the value
// of x at node n (predicted value during the corrector pass).
double density_term(const PreparedMeasure& pm, const Reader& rd, std::size_t n, double top) {
    if (pm.density.empty()) return 0.0;
    const std::size_t full_window = pm.density.size() - 1;
    // With real history the memory window is always full; with zero extension
    // the convolution only sees [0, t].
    const std::size_t w =
        (rd.history != nullptr) ? full_window : std::min<std::size_t>(n, full_window);
    if (w == 0) return 0.0;
    double s = 0.5 * pm.density[0] * top;
    for (std::size_t k = 1; k < w; ++k) {
        s += pm.density[k] * rd.at(static_cast<long long>(n) - static_cast<long long>(k));
    }
    s += 0.5 * pm.density[w] * rd.at(static_cast<long long>(n) - static_cast<long long>(w));
    return pm.step * s;
}

}  // namespace

StepOutput step_linear_volterra(const PreparedMeasure& pm, const GridFunction* history,
                                double initial, std::span<const double> forcing,
                                std::size_t node_count) {
    if (node_count < 2) throw std::invalid_argument("stepping: need at least two nodes");
    const double h = pm.step;
    StepOutput out;
    out.values.reserve(node_count);
    out.values.push_back(initial);
    out.lift_states.assign(pm.lift.size(), {});
    for (auto& z : out.lift_states) {
        z.reserve(node_count);
        z.push_back(0.0);
    }
    Reader rd{&out.values, history, h};
    const double h0_left = rd.left_limit_at_zero();

    auto forcing_at = [&forcing](std::size_t i) -> double {
        return forcing.empty() ? 0.0 : forcing[i];
    };
    auto lift_sum = [&pm](std::span<const double> z) {
        double s = 0.0;
        for (std::size_t i = 0; i < pm.lift.size(); ++i) s += pm.lift[i].coefficient * z[i];
        return s;
    };

    std::vector<double> z_now(pm.lift.size(), 0.0), z_pred(pm.lift.size(), 0.0);

    for (std::size_t n = 0; n + 1 < node_count; ++n) {
        const double y_n = out.values[n];
        // panel-left derivative
        double left = pm.weight_at_zero * y_n + forcing_at(n);
        for (const auto& [lag, wgt] : pm.delayed_atoms) {
            left += wgt * rd.at(static_cast<long long>(n) - static_cast<long long>(lag));
        }
        left += density_term(pm, rd, n, y_n);
        left += lift_sum(z_now);

        // predictor
        const double y_hat = y_n + h * left;
        for (std::size_t i = 0; i < pm.lift.size(); ++i) {
            const double lam = pm.lift[i].rate;
            z_pred[i] = (z_now[i] * (1.0 - 0.5 * lam * h) + 0.5 * h * (y_n + y_hat)) /
                        (1.0 + 0.5 * lam * h);
        }

        // panel-right derivative; a delayed read landing exactly on node 0
        // takes the extension's left limit (the jump opens on the next panel)
        double right = pm.weight_at_zero * y_hat + forcing_at(n + 1);
        for (const auto& [lag, wgt] : pm.delayed_atoms) {
            const long long idx = static_cast<long long>(n) + 1 - static_cast<long long>(lag);
            right += wgt * (idx == 0 ? h0_left : rd.at(idx));
        }
        right += density_term(pm, rd, n + 1, y_hat);
        right += lift_sum(z_pred);

        double y_next = y_n + 0.5 * h * (left + right);
        const bool overflowed = !std::isfinite(y_next) || std::abs(y_next) > kOverflowGuard;
        if (overflowed) {
            y_next = std::isfinite(y_next) ? y_next
                                           : std::copysign(kOverflowGuard, y_n == 0.0 ? 1.0 : y_n);
            y_next = std::clamp(y_next, -kOverflowGuard, kOverflowGuard);
        }
        out.values.push_back(y_next);
        for (std::size_t i = 0; i < pm.lift.size(); ++i) {
            const double lam = pm.lift[i].rate;
            z_now[i] = (z_now[i] * (1.0 - 0.5 * lam * h) + 0.5 * h * (y_n + y_next)) /
                       (1.0 + 0.5 * lam * h);
            out.lift_states[i].push_back(z_now[i]);
        }
        if (overflowed) {
            out.blow_up_time = h * static_cast<double>(n + 1);
            break;
        }
    }
    return out;
}

std::vector<double> derivative_nodes(const PreparedMeasure& pm, const SignedMeasure& m,
                                     const GridFunction& x, const GridFunction* history,
                                     std::span<const double> forcing) {
    const std::size_t n = x.size();
    const double h = x.step();
    std::vector<double> d(n, 0.0);
    std::vector<double> xv(x.values().begin(), x.values().end());
    Reader rd{&xv, history, h};

    for (std::size_t i = 0; i < n; ++i) d[i] = pm.weight_at_zero * xv[i];
    for (const auto& [lag, wgt] : pm.delayed_atoms) {
        for (std::size_t i = 0; i < n; ++i) {
            d[i] += wgt * rd.at(static_cast<long long>(i) - static_cast<long long>(lag));
        }
    }
    if (m.has_density()) {
        if (history == nullptr) {
            // zero extension: exactly the grid convolution, FFT above the cutoff
            std::vector<double> dens = sample_density(m, h, n);
            dens.resize(n, 0.0);
            GridFunction conv = convolve(x, GridFunction(0.0, h, std::move(dens)));
            for (std::size_t i = 0; i < n; ++i) d[i] += conv[i];
        } else {
            PreparedMeasure dense = pm;
            if (!pm.lift.empty()) {
                SignedMeasure sampled = m;
                dense = PreparedMeasure::build(sampled, h, x.horizon(), /*allow_lift=*/false);
            }
            for (std::size_t i = 0; i < n; ++i) d[i] += density_term(dense, rd, i, xv[i]);
        }
    }
    if (!forcing.empty()) {
        for (std::size_t i = 0; i < n; ++i) d[i] += forcing[i];
    }
    return d;
}

EnvelopeFit fit_envelope_rate(const GridFunction& r, double t_from, double t_to) {
    EnvelopeFit fit;
    double global_max = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) global_max = std::max(global_max, std::abs(r[i]));
    if (global_max == 0.0) {
        fit.decayed_below = true;
        return fit;
    }

    constexpr std::size_t kBuckets = 32;
    const double width = (t_to - t_from) / kBuckets;
    std::vector<double> centers, sups;
    for (std::size_t b = 0; b < kBuckets; ++b) {
        const double a = t_from + width * static_cast<double>(b);
        auto i0 = static_cast<std::size_t>(std::ceil((a - r.start_time()) / r.step()));
        auto i1 = static_cast<std::size_t>(std::floor((a + width - r.start_time()) / r.step()));
        i1 = std::min(i1, r.size() - 1);
        double sup = 0.0;
        for (std::size_t i = i0; i <= i1 && i < r.size(); ++i) sup = std::max(sup, std::abs(r[i]));
        if (sup > 1e-13 * global_max) {
            centers.push_back(a + 0.5 * width);
            sups.push_back(sup);
        }
    }

    double end_max = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.time_at(i) >= t_to - width) end_max = std::max(end_max, std::abs(r[i]));
    }
    fit.decayed_below = end_max <= 1e-8 * global_max;

    if (centers.size() < 4) {
        // fell under the floor almost immediately: decayed, no usable slope
        fit.usable = false;
        fit.tail_estimate = 0.0;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double lx = centers[i], ly = std::log(sups[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.rate = (n * sxy - sx * sy) / denom;
    fit.usable = true;
    fit.tail_estimate =
        fit.rate < 0.0 ? sups.back() / (-fit.rate) : std::numeric_limits<double>::infinity();
    return fit;
}

}  // namespace volterra::detail
