#pragma once

#include <optional>
#include <string>

#include "volterra/grid_function.hpp"
#include "volterra/measure.hpp"

namespace volterra {

enum class Integrability { yes, no, inconclusive };

const char* to_string(Integrability v);

/// A resolvent on a grid together with its derivative and the integral
/// diagnostics the limit theorems consume.
struct ResolventBundle {
    GridFunction r;
    GridFunction r_prime;  // empty for the integral resolvent
    double integral_r = 0.0;
    double integral_r_prime = 0.0;
    double tail_estimate = 0.0;
    Integrability verdict = Integrability::inconclusive;

    // diagnostics
    double fitted_decay_rate = 0.0;         // late-time exponential rate of |r|
    double lift_crosscheck = 0.0;           // max |lift - direct| when the lift ran
    bool lift_used = false;
    bool spectral_override = false;         // FDE verdict came from the root set
    std::optional<double> blow_up_time;     // set when stepping overflowed

    bool has_derivative() const { return !r_prime.empty(); }
};

/// Differential resolvent of nu: r'(t) = (r * nu)(t), r(0) = 1, by
/// predictor-corrector trapezoid stepping with history convolution. When the
/// density is an exponential sum the Markovian lift is used and cross-checked
/// against direct stepping on [0, min(T, 20)].
ResolventBundle differential_resolvent(const SignedMeasure& nu, double step, double horizon);

/// Resolvent of the finite-memory equation, driven by the reflected measure
/// (support_bound must be set; tau must sit on the grid). r_tau(t) = 0 for
/// t < 0 and r_tau(0) = 1; the integrability verdict is overridden by the
/// characteristic-root analysis, which is rigorous for finite memory.
ResolventBundle fde_resolvent(const SignedMeasure& mu_reflected, double step, double horizon);

/// Integral resolvent r_k = k + r_k * k by time stepping with an implicit
/// diagonal term. r_prime is left empty.
ResolventBundle integral_resolvent(const GridFunction& kernel, double step, double horizon);

struct IdentityReport {
    double residual_integral_r = 0.0;       // | int r + 1/m(R+) |
    double residual_integral_r_prime = 0.0; // | int r' + 1 |
    double tolerance = 0.0;
    bool defined = true;                    // false when total mass is zero
    bool pass = false;
    std::string note;
};

/// Residuals of the closed-form resolvent integrals int_0^inf r = -1/m(R+)
/// and int_0^inf r' = -1 against the computed bundle.
IdentityReport check_integral_identities(const ResolventBundle& b, const SignedMeasure& m,
                                         double tol);

/// Max over interior nodes of |centered_diff(r) - r_prime|, skipping
/// delay-activation nodes where the true derivative jumps.
double resolvent_defect(const ResolventBundle& b, const SignedMeasure& m);

}  // namespace volterra
