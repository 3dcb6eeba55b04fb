#pragma once

#include "volterra/grid_function.hpp"
#include "volterra/resolvent.hpp"

namespace volterra {

/// Mean square of the additive-noise equation (noise measure zero):
/// E[X^2](t) = x(t)^2 + (r^2 * sigma^2)(t). All inputs share the grid.
GridFunction mean_square_additive(const GridFunction& x, const ResolventBundle& b,
                                  const GridFunction& sigma);

}  // namespace volterra
