#include "splat2d/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace splat2d {

double mse(const FeatureGrid& a, const FeatureGrid& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("mse: shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const FeatureGrid& a, const FeatureGrid& b, double max_val) {
    const double err = mse(a, b);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_val * max_val / err);
}

} // namespace splat2d
