#include "splat2d/feature_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace splat2d {

FeatureGrid::FeatureGrid(int c, int h, int w, double fill)
    : channels(c), height(h), width(w) {
    if (c <= 0 || h <= 0 || w <= 0) {
        throw std::invalid_argument("FeatureGrid: dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

bool FeatureGrid::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace splat2d
