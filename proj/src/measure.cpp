#include "volterra/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace volterra {

namespace {

// fine subsampling factor for |density| integrals of analytic terms
constexpr std::size_t kTvSamplesPerUnitRate = 400;

}  // namespace

double SignedMeasure::density_value(double s) const {
    if (s < 0.0) return 0.0;
    if (!exp_density.empty()) {
        double v = 0.0;
        for (const auto& term : exp_density) v += term.coefficient * std::exp(-term.rate * s);
        return v;
    }
    if (density) {
        if (s > density->horizon()) return 0.0;
        return density->value_at(s);
    }
    return 0.0;
}

double SignedMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight;
    if (!exp_density.empty()) {
        for (const auto& term : exp_density) m += term.coefficient / term.rate;
    } else if (density) {
        m += integrate(*density, density->start_time(), density->horizon());
    }
    return m;
}

double SignedMeasure::total_variation() const {
    double tv = 0.0;
    for (const auto& a : atoms) tv += std::abs(a.weight);
    if (!exp_density.empty()) {
        if (exp_density.size() == 1) {
            tv += std::abs(exp_density[0].coefficient) / exp_density[0].rate;
        } else {
            // mixed signs can cancel; integrate |d| numerically to the window
            double min_rate = std::numeric_limits<double>::max();
            for (const auto& t : exp_density) min_rate = std::min(min_rate, t.rate);
            const double cut = density_window();
            const auto n = static_cast<std::size_t>(
                std::max<double>(64, kTvSamplesPerUnitRate * cut * min_rate));
            const double dh = cut / static_cast<double>(n);
            double acc = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double w = (i == 0 || i == n) ? 0.5 : 1.0;
                acc += w * std::abs(density_value(dh * static_cast<double>(i)));
            }
            tv += acc * dh;
            double tail = 0.0;
            for (const auto& t : exp_density)
                tail += std::abs(t.coefficient) * std::exp(-t.rate * cut) / t.rate;
            tv += tail;
        }
    } else if (density) {
        const double h = density->step();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < density->size(); ++i) {
            acc += 0.5 * h * (std::abs((*density)[i]) + std::abs((*density)[i + 1]));
        }
        tv += acc + density_tail;
    }
    return tv;
}

double SignedMeasure::extent() const {
    double e = 0.0;
    for (const auto& a : atoms) e = std::max(e, std::abs(a.location));
    if (density) e = std::max(e, density->horizon());
    if (!exp_density.empty()) e = std::max(e, density_window());
    if (support_bound) e = std::max(e, *support_bound);
    return e;
}

double SignedMeasure::density_window(double rel_tol) const {
    if (!has_density()) return 0.0;
    if (density) return density->horizon();
    // sum of |c_i| e^{-r_i W} <= rel_tol * scale
    double scale = 0.0;
    for (const auto& t : exp_density) scale += std::abs(t.coefficient) / t.rate;
    if (scale == 0.0) return 0.0;
    double w = 0.0;
    for (const auto& t : exp_density) {
        const double target = rel_tol * scale * t.rate / std::abs(t.coefficient) /
                              static_cast<double>(exp_density.size());
        if (target < 1.0) w = std::max(w, -std::log(target) / t.rate);
    }
    if (support_bound) w = std::min(w, *support_bound);
    return w;
}

void SignedMeasure::validate() const {
    for (const auto& a : atoms) {
        if (!std::isfinite(a.location) || !std::isfinite(a.weight)) {
            throw std::invalid_argument("SignedMeasure: non-finite atom");
        }
        if (a.weight == 0.0) throw std::invalid_argument("SignedMeasure: zero-weight atom");
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            if (atoms[i].location == atoms[j].location) {
                throw std::invalid_argument("SignedMeasure: duplicate atom location");
            }
        }
    }
    if (density && !exp_density.empty()) {
        throw std::invalid_argument("SignedMeasure: both sampled and analytic densities set");
    }
    for (const auto& t : exp_density) {
        if (!(t.rate > 0.0)) {
            throw std::invalid_argument("SignedMeasure: exponential density needs rate > 0");
        }
    }
    if (support_bound) {
        const double tau = *support_bound;
        if (tau < 0.0) throw std::invalid_argument("SignedMeasure: negative support bound");
        for (const auto& a : atoms) {
            if (std::abs(a.location) > tau * (1.0 + 1e-12) + 1e-12) {
                throw std::invalid_argument("SignedMeasure: atom outside support bound");
            }
        }
        if (density && density->horizon() > tau * (1.0 + 1e-12) + 1e-12) {
            throw std::invalid_argument("SignedMeasure: density support outside bound");
        }
    }
}

bool SignedMeasure::is_halfline() const {
    return std::all_of(atoms.begin(), atoms.end(),
                       [](const Atom& a) { return a.location >= 0.0; });
}

SignedMeasure zero_measure() { return SignedMeasure{}; }

SignedMeasure reflect_to_halfline(const SignedMeasure& past) {
    for (const auto& a : past.atoms) {
        if (a.location > 1e-12) {
            throw std::invalid_argument("reflect_to_halfline: atom at positive location");
        }
    }
    SignedMeasure out;
    out.atoms.reserve(past.atoms.size());
    for (const auto& a : past.atoms) out.atoms.push_back({std::max(0.0, -a.location), a.weight});
    double tau = 0.0;
    for (const auto& a : out.atoms) tau = std::max(tau, a.location);
    if (past.density) {
        const GridFunction& d = *past.density;
        if (d.horizon() > 1e-12 || d.start_time() > 0.0) {
            throw std::invalid_argument("reflect_to_halfline: density not supported on [-tau, 0]");
        }
        std::vector<double> rev(d.values().begin(), d.values().end());
        std::reverse(rev.begin(), rev.end());
        out.density = GridFunction(0.0, d.step(), std::move(rev));
        tau = std::max(tau, -d.start_time());
    }
    out.exp_density = past.exp_density;  // interpreted on the reflected variable
    out.density_tail = past.density_tail;
    out.support_bound = past.support_bound ? *past.support_bound : tau;
    out.validate();
    return out;
}

std::size_t snap_to_grid(double location, double step) {
    const double pos = location / step;
    const double snapped = std::round(pos);
    if (std::abs(pos - snapped) >= 0.5 - 1e-9) {
        throw std::invalid_argument(
            "measure: location sits exactly between grid nodes; cannot snap unambiguously");
    }
    if (snapped < 0.0) throw std::invalid_argument("measure: negative location");
    return static_cast<std::size_t>(snapped);
}

std::vector<double> sample_density(const SignedMeasure& m, double step, std::size_t max_count) {
    if (!m.has_density()) return {};
    const double window = m.density_window();
    auto count = static_cast<std::size_t>(std::floor(window / step + 1e-9)) + 1;
    count = std::min(count, max_count);
    std::vector<double> d(count);
    for (std::size_t i = 0; i < count; ++i) {
        d[i] = m.density_value(step * static_cast<double>(i));
    }
    return d;
}

GridFunction convolve_measure(const GridFunction& f, const SignedMeasure& m, ConvolvePath path) {
    if (f.start_time() != 0.0) {
        throw std::invalid_argument("convolve_measure: signal must start at 0");
    }
    m.validate();
    if (!m.is_halfline()) {
        throw std::invalid_argument("convolve_measure: measure has mass at negative locations");
    }
    const std::size_t n = f.size();
    const double h = f.step();
    std::vector<double> out(n, 0.0);
    for (const auto& a : m.atoms) {
        const std::size_t k = snap_to_grid(a.location, h);
        for (std::size_t i = k; i < n; ++i) out[i] += a.weight * f[i - k];
    }
    if (m.has_density()) {
        std::vector<double> d = sample_density(m, h, n);
        d.resize(n, 0.0);  // zero beyond the density window
        GridFunction conv = convolve(f, GridFunction(0.0, h, std::move(d)), path);
        for (std::size_t i = 1; i < n; ++i) out[i] += conv[i];
    }
    return GridFunction(0.0, h, std::move(out));
}

}  // namespace volterra
