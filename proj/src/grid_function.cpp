#include "volterra/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace volterra {

namespace {

bool steps_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

void check_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite sample");
    }
}

}  // namespace

GridFunction::GridFunction(double start_time, double step, std::vector<double> values)
    : t0_(start_time), h_(step), values_(std::move(values)) {
    if (!(h_ > 0.0)) throw std::invalid_argument("GridFunction: step must be positive");
    if (values_.empty()) throw std::invalid_argument("GridFunction: empty sample vector");
    check_finite(values_);
}

GridFunction GridFunction::sample(double start_time, double step, std::size_t count,
                                  const std::function<double(double)>& fn) {
    if (count == 0) throw std::invalid_argument("GridFunction::sample: count must be positive");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = fn(start_time + step * static_cast<double>(i));
    }
    return GridFunction(start_time, step, std::move(v));
}

GridFunction GridFunction::zeros(double start_time, double step, std::size_t count) {
    return GridFunction(start_time, step, std::vector<double>(count, 0.0));
}

double GridFunction::value_at(double t) const {
    const double slack = 1e-9 * h_;
    if (t < t0_ - slack) {
        // halfline signals are zero-extended below their start; grids that
        // begin elsewhere (histories, shifted curves) have no such convention
        if (t0_ == 0.0) return 0.0;
        throw std::out_of_range("GridFunction::value_at: before start of grid");
    }
    const double pos = (std::max(t, t0_) - t0_) / h_;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values_.size()) {
        if (pos <= static_cast<double>(values_.size() - 1) + slack / h_) return values_.back();
        throw std::out_of_range("GridFunction::value_at: beyond horizon");
    }
    const double w = pos - static_cast<double>(i);
    return values_[i] * (1.0 - w) + values_[i + 1] * w;
}

bool GridFunction::same_grid(const GridFunction& other) const {
    return steps_equal(h_, other.h_) && std::abs(t0_ - other.t0_) <= 1e-12 * std::max(1.0, h_);
}

double integrate(const GridFunction& f, double a, double b) {
    const double slack = 1e-9 * f.step();
    if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
    if (a < f.start_time() - slack || b > f.horizon() + slack) {
        throw std::invalid_argument("integrate: bounds outside the grid");
    }
    if (a == b) return 0.0;
    const double h = f.step();
    const double t0 = f.start_time();
    // first/last full nodes inside (a, b)
    auto node_above = static_cast<long long>(std::ceil((a - t0) / h - 1e-12));
    auto node_below = static_cast<long long>(std::floor((b - t0) / h + 1e-12));
    node_above = std::max<long long>(node_above, 0);
    node_below = std::min<long long>(node_below, static_cast<long long>(f.size()) - 1);

    if (node_above > node_below) {
        // both bounds inside one panel
        return 0.5 * (f.value_at(a) + f.value_at(b)) * (b - a);
    }
    double sum = 0.0;
    // partial panel [a, node_above]
    double ta = f.time_at(static_cast<std::size_t>(node_above));
    if (ta > a) sum += 0.5 * (f.value_at(a) + f[static_cast<std::size_t>(node_above)]) * (ta - a);
    // full panels
    for (long long i = node_above; i < node_below; ++i) {
        sum += 0.5 * (f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(i + 1)]) * h;
    }
    // partial panel [node_below, b]
    double tb = f.time_at(static_cast<std::size_t>(node_below));
    if (b > tb) sum += 0.5 * (f[static_cast<std::size_t>(node_below)] + f.value_at(b)) * (b - tb);
    return sum;
}

GridFunction running_integral(const GridFunction& f) {
    const double h = f.step();
    std::vector<double> F(f.size());
    F[0] = 0.0;
    double acc = 0.0, comp = 0.0;  // Kahan-compensated accumulation
    for (std::size_t i = 1; i < f.size(); ++i) {
        const double add = 0.5 * h * (f[i - 1] + f[i]) - comp;
        const double next = acc + add;
        comp = (next - acc) - add;
        acc = next;
        F[i] = acc;
    }
    return GridFunction(f.start_time(), h, std::move(F));
}

GridFunction running_mean(const GridFunction& f) {
    if (f.size() < 2) throw std::invalid_argument("running_mean: need at least two nodes");
    GridFunction F = running_integral(f);
    const double h = f.step();
    std::vector<double> m(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) {
        m[i - 1] = F[i] / (f.start_time() + h * static_cast<double>(i));
    }
    return GridFunction(f.start_time() + h, h, std::move(m));
}

GridFunction centered_derivative(const GridFunction& f) {
    if (f.size() < 3) throw std::invalid_argument("centered_derivative: need at least 3 nodes");
    const double h = f.step();
    std::vector<double> d(f.size());
    d[0] = (f[1] - f[0]) / h;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[f.size() - 1] = (f[f.size() - 1] - f[f.size() - 2]) / h;
    return GridFunction(f.start_time(), h, std::move(d));
}

namespace detail {

namespace {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

}  // namespace

std::vector<double> convolve_series_fft(std::span<const double> a, std::span<const double> b,
                                        std::size_t n_out) {
    std::size_t need = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < need) n <<= 1;
    std::vector<std::complex<double>> fa(n), fb(n);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    std::vector<double> out(std::min(n_out, need));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fa[i].real();
    return out;
}

}  // namespace detail

GridFunction convolve(const GridFunction& f, const GridFunction& g, ConvolvePath path) {
    if (!f.same_grid(g)) throw std::invalid_argument("convolve: mismatched grids");
    if (f.start_time() != 0.0) throw std::invalid_argument("convolve: inputs must start at 0");
    const std::size_t n = std::min(f.size(), g.size());
    const double h = f.step();
    if (path == ConvolvePath::automatic) {
        path = (n > kDirectConvolutionLimit) ? ConvolvePath::spectral : ConvolvePath::direct;
    }
    std::vector<double> out(n, 0.0);
    if (path == ConvolvePath::direct) {
        for (std::size_t i = 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += f[i - k] * g[k];
            out[i] = h * (s - 0.5 * f[i] * g[0] - 0.5 * f[0] * g[i]);
        }
    } else {
        std::vector<double> full = detail::convolve_series_fft(f.values().subspan(0, n),
                                                               g.values().subspan(0, n), n);
        for (std::size_t i = 1; i < n; ++i) {
            out[i] = h * (full[i] - 0.5 * f[i] * g[0] - 0.5 * f[0] * g[i]);
        }
    }
    return GridFunction(0.0, h, std::move(out));
}

}  // namespace volterra
