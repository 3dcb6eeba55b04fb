#pragma once

#include <span>
#include <string>
#include <vector>

#include "volterra/grid_function.hpp"
#include "volterra/measure.hpp"
#include "volterra/resolvent.hpp"
#include "volterra/solver.hpp"

namespace volterra {

enum class Convergence { converged, not_converged, inconclusive };

const char* to_string(Convergence v);

/// Finite-horizon Cesàro-limit estimate. The running-mean curve is windowed
/// dyadically: `estimate` is its mean over [T/2, T] and `half_width` the
/// spread (max-min)/2 there; `previous_half_width` is the spread over
/// [T/4, T/2].
struct CesaroReport {
    GridFunction curve;  // running mean of the input
    double estimate = 0.0;
    double half_width = 0.0;
    double previous_half_width = 0.0;
    double tolerance = 0.0;
    Convergence verdict = Convergence::inconclusive;
};

/// Requires horizon >= 100. Verdict: converged when the late-window spread is
/// within tol; not_converged when both dyadic windows spread at least 10x tol.
CesaroReport estimate_limit(const GridFunction& f, double tol);

/// t -> int_t^{t+theta} f(s) ds for theta in (0,1]; the horizon shortens by theta.
GridFunction interval_average_map(const GridFunction& f, double theta);

/// Constructive split f = f1 + f2 with f1(t) = (1/theta) int_{t-theta}^t f
/// (zero-extended) and F2 the running integral of f2.
struct Decomposition {
    double theta = 1.0;
    GridFunction f1;
    GridFunction f2;
    GridFunction F2;
};

Decomposition decompose(const GridFunction& f, double theta);

struct AdditivityEntry {
    double theta = 0.0;
    CesaroReport map_report;
    double slope = 0.0;  // estimate / theta
};

/// Fits the common slope L of the interval-average limits across thetas;
/// passes when the maximum pairwise deviation of the slopes stays within the
/// combined half-widths plus tol.
struct AdditivityReport {
    std::vector<AdditivityEntry> entries;
    double fitted_limit = 0.0;
    double max_pairwise_deviation = 0.0;
    Convergence verdict = Convergence::inconclusive;
    bool pass = false;
};

AdditivityReport check_additivity(const GridFunction& f, std::span<const double> thetas,
                                  double tol);

struct LimitCheck {
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

/// Cesàro limit of f * m against L * m(R+) (measure) or L * int g (function).
LimitCheck convolution_limit_check(const GridFunction& f, const SignedMeasure& m, double tol);
LimitCheck convolution_limit_check(const GridFunction& f, const GridFunction& g, double tol);

enum class PanelVerdict { pass, fail, inconclusive, not_applicable };

const char* to_string(PanelVerdict v);

struct Panel {
    std::string id;
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    PanelVerdict verdict = PanelVerdict::not_applicable;
    std::string note;
};

struct TheoremReport {
    Integrability resolvent_verdict = Integrability::inconclusive;
    std::vector<Panel> panels;
    bool all_passed() const;
};

struct VerifyOptions {
    std::vector<double> thetas{0.25, 0.5, 1.0};
    double mean_tolerance = 2e-2;      // x and x' limit comparisons
    double interval_tolerance = 1e-2;  // interval-average map estimates
    double cesaro_tolerance = 1e-2;    // convergence diagnostic for f and x
};

/// Limit-theorem panels for a solved scenario: the interval-average route,
/// the direct forcing-limit route (with the derivative mean for ide/fde), and
/// the integral-equation equivalence. Panels whose hypotheses cannot be
/// checked are marked inconclusive, never silently skipped.
TheoremReport verify_theorem(const Scenario& s, const GridFunction& x,
                             const GridFunction* xprime, const ResolventBundle* bundle,
                             const VerifyOptions& opt);

/// Positive-function equivalence: interval-average limits plus the side
/// condition (1/t) int_t^{t+1} f -> 0 against the direct Cesàro limit.
struct PositiveEquivalenceReport {
    AdditivityReport interval_route;
    double side_condition_value = 0.0;
    bool side_condition_ok = false;
    CesaroReport direct_route;
    bool equivalent = false;
    bool pass = false;
    std::string note;
};

PositiveEquivalenceReport positive_equivalence_check(const GridFunction& f, double tol);

}  // namespace volterra
