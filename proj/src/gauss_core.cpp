#include "splat2d/gauss_core.hpp"

#include <cmath>
#include <stdexcept>

namespace splat2d {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
} // namespace

Activated activate(const Gaussian2D& g) {
    if (!std::isfinite(g.sigma_x_raw) || !std::isfinite(g.sigma_y_raw) ||
        !std::isfinite(g.rho_raw) || !std::isfinite(g.opacity_raw) ||
        !std::isfinite(g.center.x) || !std::isfinite(g.center.y)) {
        throw std::invalid_argument("activate: non-finite raw parameter");
    }
    Activated out;
    out.cov.var_x = sigmoid(g.sigma_x_raw);
    out.cov.var_y = sigmoid(g.sigma_y_raw);
    out.cov.cov_xy = std::tanh(g.rho_raw) *
                     std::sqrt(out.cov.var_x * out.cov.var_y) * (1.0 - kEpsPsd);
    out.opacity = sigmoid(g.opacity_raw);
    return out;
}

double eval_density(Vec2 p, Vec2 mu, const Covariance2& cov, Normalization norm) {
    const double det = cov.det();
    const double dx = p.x - mu.x;
    const double dy = p.y - mu.y;
    // quadratic form (p-mu)^T cov^-1 (p-mu), inverse expanded for 2x2
    const double q = (cov.var_y * dx * dx - 2.0 * cov.cov_xy * dx * dy +
                      cov.var_x * dy * dy) / det;
    const double exponent = -0.5 * q;
    if (exponent < kExponentFloor) return 0.0;
    double z = 1.0;
    switch (norm) {
        case Normalization::PaperLiteral: z = 1.0 / (kTwoPi * det); break;
        case Normalization::Standard: z = 1.0 / (kTwoPi * std::sqrt(det)); break;
        case Normalization::Unnormalized: z = 1.0; break;
    }
    return z * std::exp(exponent);
}

std::vector<double> blend_feature(const Gaussian2D& g) {
    const double opacity = sigmoid(g.opacity_raw);
    std::vector<double> out(g.amplitude.size());
    for (std::size_t k = 0; k < g.amplitude.size(); ++k) {
        out[k] = opacity * g.amplitude[k];
    }
    return out;
}

std::vector<double> render_point(Vec2 p, const GaussianField& field, Normalization norm) {
    if (field.empty()) {
        throw std::invalid_argument("render_point: empty field");
    }
    std::vector<double> out(static_cast<std::size_t>(field.channels()), 0.0);
    for (const Gaussian2D& g : field.gaussians) {
        const Activated act = activate(g);
        const double f = eval_density(p, g.center, act.cov, norm);
        if (f == 0.0) continue;
        const double fa = f * act.opacity;
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += fa * g.amplitude[k];
        }
    }
    return out;
}

} // namespace splat2d
