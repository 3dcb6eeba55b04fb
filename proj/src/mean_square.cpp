#include "volterra/mean_square.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

GridFunction mean_square_additive(const GridFunction& x, const ResolventBundle& b,
                                  const GridFunction& sigma) {
    if (!x.same_grid(sigma) || x.size() != sigma.size()) {
        throw std::invalid_argument("mean_square_additive: x and sigma grids differ");
    }
    if (!x.same_grid(b.r) || b.r.size() < x.size()) {
        throw std::invalid_argument("mean_square_additive: resolvent grid does not cover x");
    }
    const std::size_t n = x.size();
    std::vector<double> r2(n), s2(n);
    for (std::size_t i = 0; i < n; ++i) {
        r2[i] = b.r[i] * b.r[i];
        s2[i] = sigma[i] * sigma[i];
    }
    GridFunction conv = convolve(GridFunction(0.0, x.step(), std::move(r2)),
                                 GridFunction(0.0, x.step(), std::move(s2)));
    std::vector<double> ms(n);
    for (std::size_t i = 0; i < n; ++i) ms[i] = x[i] * x[i] + conv[i];
    return GridFunction(0.0, x.step(), std::move(ms));
}

}  // namespace volterra
