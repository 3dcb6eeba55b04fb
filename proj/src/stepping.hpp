#pragma once

// Internal predictor-corrector trapezoid engine for linear convolution
// equations x'(t) = (x * m)(t) + f(t). Shared by the resolvent and solver
// modules; not part of the public API.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "volterra/grid_function.hpp"
#include "volterra/measure.hpp"

namespace volterra::detail {

struct PreparedMeasure {
    double step = 0.0;
    double weight_at_zero = 0.0;
    std::vector<std::pair<std::size_t, double>> delayed_atoms;  // (lag >= 1, weight)
    std::vector<double> density;   // samples on the grid, truncated to its window
    std::vector<ExpTerm> lift;     // non-empty: density handled by auxiliary ODE states
    bool bounded_memory = false;   // support_bound present (method of steps)

    bool has_density_part() const { return !density.empty() || !lift.empty(); }

    /// Samples/validates the measure on the stepping grid. Throws when an
    /// atom is too stiff for the step (|w| h > 0.5) or tau is off-grid.
    static PreparedMeasure build(const SignedMeasure& m, double step, double horizon,
                                 bool allow_lift);

    /// Full-history quadratic stepping is refused beyond this many nodes;
    /// exponential-sum densities (Markovian lift) and bounded-memory measures
    /// are exempt, and the variation-of-constants route has no such limit.
    static constexpr std::size_t kDirectHistoryLimit = 200000;

    void check_step_budget(std::size_t node_count) const;
};

struct StepOutput {
    std::vector<double> values;                 // x at nodes 0..n (may stop early)
    std::vector<std::vector<double>> lift_states;
    std::optional<double> blow_up_time;
};

/// Steps x' = (x * m) + f with x(0) = initial. `history` (psi on [-tau, 0])
/// supplies reads at negative arguments; when absent, zero extension applies
/// and the jump of x at 0 is handled by the panel-consistent trapezoid.
StepOutput step_linear_volterra(const PreparedMeasure& pm, const GridFunction* history,
                                double initial, std::span<const double> forcing,
                                std::size_t node_count);

/// Post-hoc closed-interval derivative curve D(t_n) = (x * m)(t_n) + f(t_n).
std::vector<double> derivative_nodes(const PreparedMeasure& pm, const SignedMeasure& m,
                                     const GridFunction& x, const GridFunction* history,
                                     std::span<const double> forcing);

/// Node lags (>= 1) at which the zero-extension derivative genuinely jumps;
/// defect checks skip these nodes.
std::vector<std::size_t> activation_lags(const PreparedMeasure& pm);

struct EnvelopeFit {
    double rate = 0.0;           // fitted d/dt log(envelope)
    double tail_estimate = 0.0;  // extrapolated integral of |r| beyond the horizon
    bool usable = false;
    bool decayed_below = false;  // envelope fell under 1e-8 of the global max
};

EnvelopeFit fit_envelope_rate(const GridFunction& r, double t_from, double t_to);

}  // namespace volterra::detail
