#include "splat2d/splat_render.hpp"

#include "splat2d/threading.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace splat2d {

void RenderConfig::validate() const {
    if (out_width < 1 || out_height < 1) {
        throw std::invalid_argument("RenderConfig: output dimensions must be positive");
    }
    if (kernel_grid < 3 || kernel_grid % 2 == 0) {
        throw std::invalid_argument("RenderConfig: kernel_grid must be odd and >= 3");
    }
    if (support_radius_sigmas < 1.0) {
        throw std::invalid_argument("RenderConfig: support_radius_sigmas must be >= 1");
    }
    if (tile_size < 1) {
        throw std::invalid_argument("RenderConfig: tile_size must be >= 1");
    }
}

namespace {

void check_field(const GaussianField& field) {
    if (field.empty()) {
        throw std::invalid_argument("render: empty field");
    }
    for (const Gaussian2D& g : field.gaussians) {
        if (!std::isfinite(g.center.x) || !std::isfinite(g.center.y)) {
            throw std::domain_error("render: non-finite Gaussian center");
        }
    }
}

void clamp_grid(FeatureGrid& grid) {
    for (double& v : grid.data) v = std::clamp(v, 0.0, 1.0);
}

struct Prepared {
    Activated act;
    std::vector<double> blended; // opacity * amplitude
};

Prepared prepare(const Gaussian2D& g) {
    Prepared p;
    p.act = activate(g);
    p.blended.resize(g.amplitude.size());
    for (std::size_t k = 0; k < g.amplitude.size(); ++k) {
        p.blended[k] = p.act.opacity * g.amplitude[k];
    }
    return p;
}

} // namespace

std::vector<AffinePlacement> affine_placements(const GaussianField& field,
                                               const RenderConfig& cfg) {
    cfg.validate();
    check_field(field);
    std::vector<AffinePlacement> out;
    out.reserve(field.size());
    const double sx = static_cast<double>(cfg.kernel_grid) / cfg.out_width;
    const double sy = static_cast<double>(cfg.kernel_grid) / cfg.out_height;
    for (const Gaussian2D& g : field.gaussians) {
        AffinePlacement p;
        p.m[0][0] = sx;
        p.m[0][2] = 2.0 * g.center.x - 1.0;
        p.m[1][1] = sy;
        p.m[1][2] = 2.0 * g.center.y - 1.0;
        out.push_back(p);
    }
    return out;
}

PixelBox support_box(Vec2 center, const Covariance2& cov, double radius_sigmas,
                     int out_w, int out_h) {
    const double r = radius_sigmas * std::max(std::sqrt(cov.var_x), std::sqrt(cov.var_y));
    PixelBox box;
    // pixel ix is inside iff |(ix + 0.5)/W - cx| <= r
    box.x0 = std::max(0, static_cast<int>(std::ceil((center.x - r) * out_w - 0.5)));
    box.x1 = std::min(out_w - 1, static_cast<int>(std::floor((center.x + r) * out_w - 0.5)));
    box.y0 = std::max(0, static_cast<int>(std::ceil((center.y - r) * out_h - 0.5)));
    box.y1 = std::min(out_h - 1, static_cast<int>(std::floor((center.y + r) * out_h - 0.5)));
    return box;
}

FeatureGrid render_affine(const GaussianField& field, const RenderConfig& cfg) {
    cfg.validate();
    check_field(field);
    FeatureGrid out(field.channels(), cfg.out_height, cfg.out_width, 0.0);
    const double half = cfg.kernel_grid / 2.0;
    for (const Gaussian2D& g : field.gaussians) {
        const Prepared p = prepare(g);
        // window: kernel_grid output pixels centered on mu
        const double cx_px = g.center.x * cfg.out_width;
        const double cy_px = g.center.y * cfg.out_height;
        const int x0 = std::max(0, static_cast<int>(std::ceil(cx_px - 0.5 - half)));
        const int x1 = std::min(cfg.out_width - 1, static_cast<int>(std::floor(cx_px - 0.5 + half)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(cy_px - 0.5 - half)));
        const int y1 = std::min(cfg.out_height - 1, static_cast<int>(std::floor(cy_px - 0.5 + half)));
        for (int iy = y0; iy <= y1; ++iy) {
            for (int ix = x0; ix <= x1; ++ix) {
                const double f = eval_density(pixel_center(ix, iy, cfg.out_width, cfg.out_height),
                                              g.center, p.act.cov, cfg.normalization);
                if (f == 0.0) continue;
                for (int k = 0; k < out.channels; ++k) {
                    out.at(k, iy, ix) += f * p.blended[static_cast<std::size_t>(k)];
                }
            }
        }
    }
    if (cfg.clamp_output) clamp_grid(out);
    return out;
}

FeatureGrid render_affine_warp(const GaussianField& field, const RenderConfig& cfg) {
    cfg.validate();
    check_field(field);
    if (cfg.normalization != Normalization::Unnormalized) {
        throw std::invalid_argument("render_affine_warp: Unnormalized convention only");
    }
    const int kg = cfg.kernel_grid;
    FeatureGrid out(field.channels(), cfg.out_height, cfg.out_width, 0.0);
    std::vector<double> kernel(static_cast<std::size_t>(kg) * kg);
    const double half = kg / 2.0;
    for (const Gaussian2D& g : field.gaussians) {
        const Prepared p = prepare(g);
        const Covariance2& cov = p.act.cov;
        const double det = cov.det();
        // sample the kernel on the local [-5,5]^2 grid
        double peak = 0.0;
        for (int j = 0; j < kg; ++j) {
            const double y = -5.0 + 10.0 * j / (kg - 1);
            for (int i = 0; i < kg; ++i) {
                const double x = -5.0 + 10.0 * i / (kg - 1);
                const double q = (cov.var_y * x * x - 2.0 * cov.cov_xy * x * y +
                                  cov.var_x * y * y) / det;
                const double e = -0.5 * q;
                const double v = e < kExponentFloor ? 0.0 : std::exp(e);
                kernel[static_cast<std::size_t>(j) * kg + i] = v;
                peak = std::max(peak, v);
            }
        }
        for (double& v : kernel) v /= peak; // normalize to [0,1]
        // translate: one kernel sample per output pixel, bilinear at the
        // fractional offset of mu
        const double cx_px = g.center.x * cfg.out_width;
        const double cy_px = g.center.y * cfg.out_height;
        const int x0 = std::max(0, static_cast<int>(std::ceil(cx_px - 0.5 - half)));
        const int x1 = std::min(cfg.out_width - 1, static_cast<int>(std::floor(cx_px - 0.5 + half)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(cy_px - 0.5 - half)));
        const int y1 = std::min(cfg.out_height - 1, static_cast<int>(std::floor(cy_px - 0.5 + half)));
        const double c_idx = (kg - 1) / 2.0;
        auto sample = [&](double jx, double jy) -> double {
            if (jx < 0.0 || jy < 0.0 || jx > kg - 1 || jy > kg - 1) return 0.0;
            const int fx = static_cast<int>(jx);
            const int fy = static_cast<int>(jy);
            const int fx1 = std::min(fx + 1, kg - 1);
            const int fy1 = std::min(fy + 1, kg - 1);
            const double ax = jx - fx;
            const double ay = jy - fy;
            const double v00 = kernel[static_cast<std::size_t>(fy) * kg + fx];
            const double v01 = kernel[static_cast<std::size_t>(fy) * kg + fx1];
            const double v10 = kernel[static_cast<std::size_t>(fy1) * kg + fx];
            const double v11 = kernel[static_cast<std::size_t>(fy1) * kg + fx1];
            return (1 - ay) * ((1 - ax) * v00 + ax * v01) + ay * ((1 - ax) * v10 + ax * v11);
        };
        for (int iy = y0; iy <= y1; ++iy) {
            const double jy = (iy + 0.5 - cy_px) + c_idx;
            for (int ix = x0; ix <= x1; ++ix) {
                const double jx = (ix + 0.5 - cx_px) + c_idx;
                const double v = sample(jx, jy);
                if (v == 0.0) continue;
                for (int k = 0; k < out.channels; ++k) {
                    out.at(k, iy, ix) += v * p.blended[static_cast<std::size_t>(k)];
                }
            }
        }
    }
    if (cfg.clamp_output) clamp_grid(out);
    return out;
}

FeatureGrid render_tiled(const GaussianField& field, const RenderConfig& cfg, int threads) {
    cfg.validate();
    check_field(field);
    const int w = cfg.out_width;
    const int h = cfg.out_height;
    const int nch = field.channels();
    FeatureGrid out(nch, h, w, 0.0);

    const std::size_t n = field.size();
    std::vector<Prepared> prepared;
    prepared.reserve(n);
    std::vector<PixelBox> boxes;
    boxes.reserve(n);
    for (const Gaussian2D& g : field.gaussians) {
        prepared.push_back(prepare(g));
        boxes.push_back(support_box(g.center, prepared.back().act.cov,
                                    cfg.support_radius_sigmas, w, h));
    }

    const int tiles_x = (w + cfg.tile_size - 1) / cfg.tile_size;
    const int tiles_y = (h + cfg.tile_size - 1) / cfg.tile_size;
    const std::size_t num_tiles = static_cast<std::size_t>(tiles_x) * tiles_y;

    // per-tile gaussian lists, ascending field order
    std::vector<std::vector<std::uint32_t>> tile_lists(num_tiles);
    for (std::size_t gi = 0; gi < n; ++gi) {
        const PixelBox& b = boxes[gi];
        if (b.empty()) continue;
        const int tx0 = b.x0 / cfg.tile_size;
        const int tx1 = b.x1 / cfg.tile_size;
        const int ty0 = b.y0 / cfg.tile_size;
        const int ty1 = b.y1 / cfg.tile_size;
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int tx = tx0; tx <= tx1; ++tx) {
                tile_lists[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(
                    static_cast<std::uint32_t>(gi));
            }
        }
    }

    parallel_for_blocks(num_tiles, threads, [&](std::size_t tile) {
        const auto& list = tile_lists[tile];
        if (list.empty()) return;
        const int tx = static_cast<int>(tile % tiles_x);
        const int ty = static_cast<int>(tile / tiles_x);
        const int px0 = tx * cfg.tile_size;
        const int px1 = std::min(w - 1, px0 + cfg.tile_size - 1);
        const int py0 = ty * cfg.tile_size;
        const int py1 = std::min(h - 1, py0 + cfg.tile_size - 1);
        for (int iy = py0; iy <= py1; ++iy) {
            for (int ix = px0; ix <= px1; ++ix) {
                const Vec2 p = pixel_center(ix, iy, w, h);
                for (const std::uint32_t gi : list) {
                    const PixelBox& b = boxes[gi];
                    if (ix < b.x0 || ix > b.x1 || iy < b.y0 || iy > b.y1) continue;
                    const Gaussian2D& g = field.gaussians[gi];
                    const double f = eval_density(p, g.center, prepared[gi].act.cov,
                                                  cfg.normalization);
                    if (f == 0.0) continue;
                    for (int k = 0; k < nch; ++k) {
                        out.at(k, iy, ix) += f * prepared[gi].blended[static_cast<std::size_t>(k)];
                    }
                }
            }
        }
    });

    if (cfg.clamp_output) clamp_grid(out);
    return out;
}

FeatureGrid render_at_scale(const GaussianField& field, double scale, int base_h,
                            int base_w, const RenderConfig& cfg, int threads) {
    if (!(scale > 0.0) || base_h < 1 || base_w < 1) {
        throw std::domain_error("render_at_scale: invalid scale or base size");
    }
    const long out_h = std::lround(base_h * scale);
    const long out_w = std::lround(base_w * scale);
    if (out_h < 1 || out_w < 1) {
        throw std::domain_error("render_at_scale: degenerate output size " +
                                std::to_string(out_w) + "x" + std::to_string(out_h));
    }
    return render_tiled(field, cfg.with_output(static_cast<int>(out_w),
                                               static_cast<int>(out_h)), threads);
}

} // namespace splat2d
