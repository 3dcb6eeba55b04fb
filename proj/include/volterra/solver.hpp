#pragma once

#include <optional>
#include <stdexcept>

#include "volterra/grid_function.hpp"
#include "volterra/measure.hpp"
#include "volterra/resolvent.hpp"

namespace volterra {

enum class ScenarioKind { ide, fde, integral };

const char* to_string(ScenarioKind k);

/// One solvable problem instance: a perturbed integrodifferential equation
/// x' = x*nu + f with x(0) = xi, a finite-memory equation with history psi on
/// [-tau, 0] (measure stored in reflected form), or the integral equation
/// x = k*x + f.
struct Scenario {
    ScenarioKind kind = ScenarioKind::ide;
    SignedMeasure measure;            // ide: nu on R+; fde: reflected mu with support_bound
    GridFunction kernel;              // integral kind only
    GridFunction forcing;             // sampled on the scenario grid
    double initial_value = 0.0;       // ide: xi
    GridFunction history;             // fde: psi on [-tau, 0]; empty means psi = 0
    double step = 1e-2;
    double horizon = 100.0;

    void validate() const;  // throws std::invalid_argument
};

struct SolverOverflow : std::runtime_error {
    explicit SolverOverflow(double t);
    double blow_up_time;
};

GridFunction solve_ide_direct(const Scenario& s);
GridFunction solve_ide_voc(const Scenario& s, const ResolventBundle& b);

/// Method-of-steps solution of the finite-memory equation.
GridFunction solve_fde(const Scenario& s);

/// Variation-of-constants route: x = x0 + r_tau * f, where the history term
/// x0(t) = r_tau(t) psi(0) + (r_tau * g)(t) folds psi and the measure into a
/// kernel g supported on [0, tau].
GridFunction solve_fde_voc(const Scenario& s, const ResolventBundle& b);

/// x = f + r_k * f.
GridFunction solve_integral_eq(const Scenario& s, const ResolventBundle& rk);

/// Direct fixed-point stepping of the integral equation (cross-check route).
GridFunction solve_integral_direct(const Scenario& s);

/// Post-hoc derivative curve x'(t) = (x * measure)(t) + f(t) for ide/fde
/// scenarios, reading psi for pre-zero arguments.
GridFunction derivative_curve(const Scenario& s, const GridFunction& x);

/// Max over interior nodes of |centered_diff(x) - (x * measure) - f|; the
/// a-posteriori residual used by the order-of-accuracy checks. Delay
/// activation nodes are skipped.
double solution_defect(const Scenario& s, const GridFunction& x);

}  // namespace volterra
