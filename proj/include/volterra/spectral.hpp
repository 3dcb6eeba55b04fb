#pragma once

#include <complex>
#include <string>
#include <vector>

#include "volterra/measure.hpp"
#include "volterra/resolvent.hpp"

namespace volterra {

struct Rectangle {
    double re_min = -10.0;
    double re_max = 1.0;
    double im_min = -10.0;
    double im_max = 10.0;

    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    bool contains(std::complex<double> z) const;
};

struct Root {
    std::complex<double> location;
    int multiplicity = 1;
};

/// Characteristic roots of h(lambda) = lambda - int e^{lambda s} mu(ds) in a
/// search rectangle, found by argument-principle subdivision. `v0` is the
/// largest real part over the roots found; `count_certified` records that the
/// winding counts matched the recovered multiplicities everywhere and that
/// the a-priori bound |lambda| <= TV(mu) e^{|Re lambda| tau} confines every
/// root right of v0 to the rectangle.
struct RootSet {
    Rectangle rectangle;
    std::vector<Root> roots;
    double v0 = 0.0;
    bool count_certified = false;
    double total_variation = 0.0;
    double tau = 0.0;
    std::string note;

    int total_multiplicity() const;
};

/// h(lambda) evaluated for the reflected measure (mass at a >= 0 stands for
/// the original mass at -a): h = lambda - sum w_j e^{-lambda a_j} - integral.
std::complex<double> char_eval(const SignedMeasure& mu_reflected, std::complex<double> lambda);
std::complex<double> char_derivative(const SignedMeasure& mu_reflected,
                                     std::complex<double> lambda);

/// Winding number of h around the rectangle boundary (adaptive phase
/// tracking). Throws if a root sits on the contour after the allowed nudges.
int winding_number(const SignedMeasure& mu_reflected, const Rectangle& rect);

Rectangle default_search_rectangle(const SignedMeasure& mu_reflected);

RootSet locate_roots(const SignedMeasure& mu_reflected, const Rectangle& rect);
RootSet locate_roots(const SignedMeasure& mu_reflected);

/// yes iff v0 < -1e-9 with certification; no iff a certified root has
/// Re >= 0; inconclusive otherwise.
Integrability integrability_verdict(const RootSet& rs);

struct DecayRateReport {
    double fitted_slope = 0.0;
    double expected = 0.0;
    double tolerance = 0.05;
    bool pass = false;
    std::string note;
};

/// Fits the late-time exponential rate of |r_tau| and compares with v0.
DecayRateReport decay_rate_check(const RootSet& rs, const ResolventBundle& b);

struct ResonantMode {
    double beta = 0.0;                    // imaginary-axis root frequency
    std::complex<double> residue{0, 0};   // 1 / h'(i beta)
    double c1 = 0.0;                      // 2 Re(residue)
    double k1 = 0.0;                      // -2 Im(residue)
};

/// Data of the simple imaginary-axis root pair; throws std::invalid_argument
/// when the root set has none (the construction is then inapplicable).
ResonantMode resonant_mode(const SignedMeasure& mu_reflected, const RootSet& rs);

/// The forcing f(t) = k1 sin(beta t) - c1 cos(beta t) tuned to the
/// imaginary-axis pair; it defeats the Cesàro limit of the solution.
GridFunction resonant_forcing(const SignedMeasure& mu_reflected, const RootSet& rs, double step,
                              double horizon);

}  // namespace volterra
