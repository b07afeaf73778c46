#pragma once

// Test-only reference implementations, kept independent of the fast paths
// they check.

#include "splat2d/autograd.hpp"
#include "splat2d/feature_grid.hpp"
#include "splat2d/gauss_core.hpp"
#include "splat2d/rng.hpp"

#include <cmath>
#include <vector>

namespace splat2d::testing {

// Eq-5 sum evaluated per pixel center via render_point.
inline FeatureGrid oracle_render(const GaussianField& field, int w, int h,
                                 Normalization norm) {
    FeatureGrid out(field.channels(), h, w, 0.0);
    for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
            const auto v = render_point({(ix + 0.5) / w, (iy + 0.5) / h}, field, norm);
            for (int k = 0; k < out.channels; ++k) out.at(k, iy, ix) = v[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

// Central finite differences of a scalar functional over the packed raw
// parameter vector of a field.
template <typename LossFn>
std::vector<double> fd_grads(const GaussianField& base, LossFn&& loss, double step = 1e-5) {
    GaussianField field = base;
    std::vector<double> params = pack_params(field);
    std::vector<double> grads(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        unpack_params(params, field);
        const double hi = loss(field);
        params[i] = saved - step;
        unpack_params(params, field);
        const double lo = loss(field);
        params[i] = saved;
        grads[i] = (hi - lo) / (2.0 * step);
    }
    unpack_params(params, field);
    return grads;
}

// Spec tolerance: 1e-4 relative where the magnitude exceeds 1e-6, else a
// 1e-7 absolute floor.
inline bool grads_close(double analytic, double fd, double rel = 1e-4,
                        double abs_floor = 1e-7, double mag_cut = 1e-6) {
    const double mag = std::max(std::abs(analytic), std::abs(fd));
    if (mag > mag_cut) return std::abs(analytic - fd) <= rel * mag;
    return std::abs(analytic - fd) <= abs_floor;
}

// Random fields whose density stays clear of the exponent floor everywhere
// on the unit square, keeping finite differences well-conditioned.
inline GaussianField random_smooth_field(SplitMix64& rng, int count, int channels) {
    GaussianField field;
    for (int i = 0; i < count; ++i) {
        Gaussian2D g;
        g.center = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        g.sigma_x_raw = rng.uniform(-2.9, 1.5); // sigmoid in [~0.05, ~0.82]
        g.sigma_y_raw = rng.uniform(-2.9, 1.5);
        g.rho_raw = rng.uniform(-0.3, 0.3);
        g.opacity_raw = rng.uniform(-1.5, 1.5);
        g.amplitude.resize(static_cast<std::size_t>(channels));
        for (double& a : g.amplitude) a = rng.uniform(-1.0, 1.0);
        field.gaussians.push_back(std::move(g));
    }
    return field;
}

} // namespace splat2d::testing
