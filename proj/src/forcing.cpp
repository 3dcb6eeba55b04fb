#include "volterra/forcing.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double pathological_step_bound(double alpha, double horizon) {
    if (!(alpha > 0.0)) throw std::invalid_argument("pathological family needs alpha > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("pathological family needs horizon > 0");
    return kPi / (10.0 * (alpha + 1.0) * std::pow(horizon, alpha));
}

GridFunction pathological_forcing(double alpha, double horizon, double step) {
    const double bound = pathological_step_bound(alpha, horizon);
    if (step > bound * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "pathological_forcing: step too coarse for the oscillation at the horizon "
            "(undersampling would fake convergence)");
    }
    const auto n = static_cast<std::size_t>(std::llround(horizon / step)) + 1;
    return GridFunction::sample(0.0, step, n, [alpha](double t) {
        if (t == 0.0) return 0.0;
        return (alpha + 1.0) * std::pow(t, alpha) * std::sin(std::pow(t, alpha + 1.0)) * t;
    });
}

GridFunction reference_forcing(ReferenceKind kind, double level, double horizon, double step) {
    if (!(step > 0.0) || !(horizon > step)) {
        throw std::invalid_argument("reference_forcing: need step > 0 and horizon > step");
    }
    const auto n = static_cast<std::size_t>(std::llround(horizon / step)) + 1;
    switch (kind) {
        case ReferenceKind::constant:
            return GridFunction::sample(0.0, step, n, [level](double) { return level; });
        case ReferenceKind::decaying_oscillation:
            return GridFunction::sample(0.0, step, n, [level](double t) {
                return level + std::exp(-t) * std::sin(t);
            });
        case ReferenceKind::abs_sine:
            return GridFunction::sample(0.0, step, n,
                                        [](double t) { return std::abs(std::sin(t)); });
        case ReferenceKind::ramp:
            return GridFunction::sample(0.0, step, n, [](double t) { return t; });
    }
    throw std::invalid_argument("reference_forcing: unknown kind");
}

}  // namespace volterra
