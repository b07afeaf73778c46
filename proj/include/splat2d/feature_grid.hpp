#pragma once

#include <cstddef>
#include <vector>

namespace splat2d {

// Dense channels x height x width array of doubles. Layout is channel-major,
// row-major within a channel: index = (c * height + y) * width + x.
struct FeatureGrid {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureGrid() = default;
    FeatureGrid(int c, int h, int w, double fill = 0.0);

    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height + y) * width + x;
    }
    double& at(int c, int y, int x) { return data[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data[index(c, y, x)]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureGrid& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
    bool all_finite() const;
};

} // namespace splat2d
