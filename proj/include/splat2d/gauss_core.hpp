#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace splat2d {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Prefactor convention for the Gaussian density. PaperLiteral divides by
// 2*pi*det(cov); Standard is the usual bivariate density with sqrt(det);
// Unnormalized drops the prefactor entirely so the kernel peaks at 1.
enum class Normalization {
    PaperLiteral,
    Standard,
    Unnormalized,
};

// Exponents below this evaluate to a density of exactly zero. Bounds the
// support of every kernel consistently across the reference and tiled paths.
inline constexpr double kExponentFloor = -30.0;

// Margin keeping the activated covariance strictly positive definite:
// det >= kEpsPsd * var_x * var_y for any finite raw parameters.
inline constexpr double kEpsPsd = 1e-4;

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// One continuous field: a center in normalized [0,1]^2 coordinates, raw
// (pre-activation) covariance and opacity parameters, and a feature
// amplitude vector (one entry per channel).
struct Gaussian2D {
    Vec2 center;
    double sigma_x_raw = 0.0;
    double sigma_y_raw = 0.0;
    double rho_raw = 0.0;
    double opacity_raw = 0.0;
    std::vector<double> amplitude;
};

// Symmetric positive definite 2x2 covariance.
struct Covariance2 {
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;

    double det() const { return var_x * var_y - cov_xy * cov_xy; }
    bool positive_definite() const {
        return var_x > 0.0 && var_y > 0.0 && det() > 0.0;
    }
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    bool contains(Vec2 p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

// Ordered collection of Gaussians over a domain rectangle. When built from a
// pixel grid the order is row-major by originating pixel.
struct GaussianField {
    std::vector<Gaussian2D> gaussians;
    Rect domain;

    std::size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }
    int channels() const {
        return gaussians.empty() ? 0 : static_cast<int>(gaussians.front().amplitude.size());
    }
};

struct Activated {
    Covariance2 cov;
    double opacity = 0.0;
};

// Activates raw parameters: var = sigmoid(raw), cov_xy through tanh scaled to
// keep the matrix positive definite by construction, opacity = sigmoid(raw).
// Throws std::invalid_argument on non-finite raw input.
Activated activate(const Gaussian2D& g);

// Density of Eq-3 form at point p: Z * exp(-0.5 * (p-mu)^T cov^-1 (p-mu)).
// Exponents below kExponentFloor return exactly 0.
double eval_density(Vec2 p, Vec2 mu, const Covariance2& cov,
                    Normalization norm = Normalization::PaperLiteral);

// Opacity-modulated amplitude: sigmoid(opacity_raw) * amplitude.
std::vector<double> blend_feature(const Gaussian2D& g);

// Reference renderer: the exact, untruncated sum of density * blended
// amplitude over every Gaussian. All fast paths are tested against this.
// Throws std::invalid_argument on an empty field.
std::vector<double> render_point(Vec2 p, const GaussianField& field,
                                 Normalization norm = Normalization::PaperLiteral);

} // namespace splat2d
