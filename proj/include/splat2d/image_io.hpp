#pragma once

#include "splat2d/feature_grid.hpp"

#include <string>

namespace splat2d {

// Loads a binary PPM (P6) or PGM (P5), maxval 255, into a [0,1] grid
// (v / 255). Throws std::runtime_error on malformed or unsupported files.
FeatureGrid load_image(const std::string& path);

// Writes P6 for 3-channel grids, P5 for 1-channel. Values are clamped to
// [0,1] and quantized with round(v * 255); 8-bit data round-trips bit-exactly.
void save_image(const FeatureGrid& grid, const std::string& path);

} // namespace splat2d
