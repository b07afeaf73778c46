#pragma once

#include "splat2d/feature_grid.hpp"
#include "splat2d/gauss_core.hpp"

#include <vector>

namespace splat2d {

struct RenderConfig {
    int out_width = 0;
    int out_height = 0;
    // side length of the local kernel sample grid, in output pixels; odd
    int kernel_grid = 101;
    // truncation radius of the tiled path, in standard deviations
    double support_radius_sigmas = 4.0;
    int tile_size = 16;
    Normalization normalization = Normalization::PaperLiteral;
    bool clamp_output = false;

    // throws std::invalid_argument when a field is out of range
    void validate() const;

    RenderConfig with_output(int w, int h) const {
        RenderConfig c = *this;
        c.out_width = w;
        c.out_height = h;
        return c;
    }
};

// Row-major 2x3 matrix [[sx, 0, tx], [0, sy, ty]] mapping the kernel's local
// [-1,1]^2 window onto the [-1,1]-normalized output canvas.
struct AffinePlacement {
    double m[2][3] = {{0, 0, 0}, {0, 0, 0}};
};

// Placement per Gaussian: pure translation (t = 2*mu - 1) plus the fixed
// local-grid-to-canvas scale kernel_grid/out_dim. Anisotropy lives in the
// kernel itself, never in the placement.
std::vector<AffinePlacement> affine_placements(const GaussianField& field,
                                               const RenderConfig& cfg);

// Affine-grid renderer: each Gaussian is evaluated analytically at the output
// pixel centers covered by its placed kernel window (kernel_grid pixels
// square, centered on mu). Pixels outside every window stay zero, so
// agreement with render_point tightens as kernel_grid grows.
// Centers outside the canvas contribute their in-canvas portion; a non-finite
// center raises std::domain_error.
FeatureGrid render_affine(const GaussianField& field, const RenderConfig& cfg);

// Precompute-then-warp variant: samples the kernel once on a local grid over
// [-5,5]^2 in kernel units, peak-normalizes it to [0,1], then translates it
// onto the canvas with bilinear resampling (one kernel sample per output
// pixel). Kernel units are decoupled from domain units, so this path is a
// demo of the grid-transformation recipe rather than an oracle-comparable
// renderer. Unnormalized convention only.
FeatureGrid render_affine_warp(const GaussianField& field, const RenderConfig& cfg);

// Tiled fast path: identical contract to render_affine, but each Gaussian is
// evaluated only at pixels inside its support box of half-width
// support_radius_sigmas * max(sigma_x, sigma_y) (domain units). Tiles are a
// scheduling structure only: per-pixel membership is decided by the box, so
// output is bit-identical for any tile_size and any worker count.
FeatureGrid render_tiled(const GaussianField& field, const RenderConfig& cfg,
                         int threads = 1);

// Renders onto a round(base * scale) grid whose pixel centers live in the
// same normalized domain. Throws std::domain_error when the rounded output
// collapses below one pixel.
FeatureGrid render_at_scale(const GaussianField& field, double scale,
                            int base_h, int base_w, const RenderConfig& cfg,
                            int threads = 1);

// Support box of one Gaussian in pixel index space: [x0,x1] x [y0,y1]
// inclusive, already clipped to the canvas; empty() when the box misses it.
struct PixelBox {
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
    bool empty() const { return x1 < x0 || y1 < y0; }
};

PixelBox support_box(Vec2 center, const Covariance2& cov,
                     double radius_sigmas, int out_w, int out_h);

inline Vec2 pixel_center(int ix, int iy, int out_w, int out_h) {
    return {(ix + 0.5) / out_w, (iy + 0.5) / out_h};
}

} // namespace splat2d
