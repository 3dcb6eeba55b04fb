#pragma once

#include <optional>
#include <vector>

#include "volterra/grid_function.hpp"

namespace volterra {

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

/// One term of an exponential-sum density: coefficient * exp(-rate * s), rate > 0.
struct ExpTerm {
    double coefficient = 0.0;
    double rate = 1.0;
};

/// Finite signed Borel measure on the halfline (or, before reflection, on
/// [-tau, 0]): a list of atoms plus an optional integrable density. The
/// density is either sampled on a grid or given analytically as a sum of
/// decaying exponentials; the analytic form is what enables the Markovian
/// lift in the solvers.
struct SignedMeasure {
    std::vector<Atom> atoms;
    std::optional<GridFunction> density;  // sampled, zero beyond its horizon
    std::vector<ExpTerm> exp_density;     // analytic alternative to `density`
    std::optional<double> support_bound;  // tau: all mass in [0, tau]
    double density_tail = 0.0;            // recorded |mass| bound beyond the sampled horizon

    bool has_density() const { return density.has_value() || !exp_density.empty(); }
    double density_value(double s) const;

    double total_mass() const;
    double total_variation() const;

    /// Largest location carrying mass (atoms, density support, support_bound).
    double extent() const;

    /// Length of the window [0, W] outside which the density is negligible
    /// relative to `rel_tol * total_variation`. Infinite-support exponential
    /// densities are truncated here; sampled densities end at their horizon.
    double density_window(double rel_tol = 1e-15) const;

    /// Throws std::invalid_argument on duplicate atoms, zero weights,
    /// non-finite data, both density forms set, or mass outside support_bound.
    void validate() const;

    bool is_halfline() const;  // all atom locations >= 0
};

SignedMeasure zero_measure();

/// Reflection of a measure supported on [-tau, 0] (atom locations <= 0,
/// density sampled on [-tau, 0]) to the halfline: an atom at -a maps to an
/// atom at +a, the density is mirrored, and support_bound is set to tau.
SignedMeasure reflect_to_halfline(const SignedMeasure& past);

/// (f * m)(t) = sum_{a_j <= t} w_j f(t - a_j) + int_0^t d(s) f(t - s) ds on
/// f's grid, with the closed-interval convention (atoms at s = 0 and s = t
/// both contribute). Atoms are snapped to the nearest node.
GridFunction convolve_measure(const GridFunction& f, const SignedMeasure& m,
                              ConvolvePath path = ConvolvePath::automatic);

/// Density samples of m on a grid with the given step, truncated to its
/// negligibility window (at most `max_count` nodes). Empty if no density.
std::vector<double> sample_density(const SignedMeasure& m, double step, std::size_t max_count);

/// Nearest-node index for an off-grid location; throws on an exact half-step tie.
std::size_t snap_to_grid(double location, double step);

}  // namespace volterra
