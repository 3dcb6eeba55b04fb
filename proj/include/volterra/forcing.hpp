#pragma once

#include "volterra/grid_function.hpp"

namespace volterra {

/// Largest admissible step for the pathological family at a given horizon:
/// 20 samples per local period of sin(t^{alpha+1}), i.e.
/// pi / (10 (alpha+1) T^alpha).
double pathological_step_bound(double alpha, double horizon);

/// The forcing f(t) = (alpha+1) t^alpha sin(t^{alpha+1}) t, alpha > 0: its
/// interval averages admit a Cesàro limit (zero) while f itself does not.
/// Refuses steps above the bound — aliasing would fake convergence.
GridFunction pathological_forcing(double alpha, double horizon, double step);

enum class ReferenceKind { constant, decaying_oscillation, abs_sine, ramp };

/// Well-behaved fixtures: constant `level`, level + e^{-t} sin t, |sin t|, t.
GridFunction reference_forcing(ReferenceKind kind, double level, double horizon, double step);

}  // namespace volterra
