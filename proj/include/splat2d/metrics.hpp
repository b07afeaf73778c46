#pragma once

#include "splat2d/feature_grid.hpp"

namespace splat2d {

// Mean squared error over all entries (RGB-mean convention, no border crop).
double mse(const FeatureGrid& a, const FeatureGrid& b);

// 10 * log10(max_val^2 / MSE) in dB; identical inputs return +infinity.
double psnr(const FeatureGrid& a, const FeatureGrid& b, double max_val = 1.0);

} // namespace splat2d
