#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace volterra {

/// Real-valued signal sampled on a uniform time grid.
///
/// Halfline signals start at t0 = 0 and are implicitly extended by zero for
/// t < 0; history functions (delay equations) use t0 = -tau. Between nodes the
/// signal is the piecewise-linear interpolant, which is what the trapezoid
/// quadrature used throughout this library integrates exactly.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(double start_time, double step, std::vector<double> values);

    static GridFunction sample(double start_time, double step, std::size_t count,
                               const std::function<double(double)>& fn);
    static GridFunction zeros(double start_time, double step, std::size_t count);

    double start_time() const { return t0_; }
    double step() const { return h_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double horizon() const { return t0_ + h_ * static_cast<double>(values_.size() - 1); }
    double time_at(std::size_t i) const { return t0_ + h_ * static_cast<double>(i); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    /// Piecewise-linear evaluation. Returns 0 for t < 0 (zero extension); a
    /// small roundoff slack beyond the horizon clamps to the end value.
    double value_at(double t) const;

    bool same_grid(const GridFunction& other) const;

private:
    double t0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> values_;
};

/// Composite-trapezoid integral of f over [a, b]; a and b need not be nodes.
double integrate(const GridFunction& f, double a, double b);

/// Cumulative trapezoid integral F(t) = int_{t0}^t f, on the same grid (F(t0) = 0).
GridFunction running_integral(const GridFunction& f);

/// The curve t -> (1/t) int_0^t f(s) ds for t >= h. The output grid starts at
/// t0 + h; the first node carries the one-panel trapezoid value.
GridFunction running_mean(const GridFunction& f);

/// Centered finite-difference derivative (one-sided at the ends).
GridFunction centered_derivative(const GridFunction& f);

enum class ConvolvePath { automatic, direct, spectral };

/// Convolution (f*g)(t) = int_0^t f(t-s) g(s) ds on the common grid. Both
/// inputs must start at 0 and share the step. The automatic path switches to
/// FFT above kDirectConvolutionLimit output nodes.
GridFunction convolve(const GridFunction& f, const GridFunction& g,
                      ConvolvePath path = ConvolvePath::automatic);

inline constexpr std::size_t kDirectConvolutionLimit = 4096;

namespace detail {
/// Linear convolution of two sample sequences, truncated to n_out terms.
std::vector<double> convolve_series_fft(std::span<const double> a, std::span<const double> b,
                                        std::size_t n_out);
}  // namespace detail

}  // namespace volterra
