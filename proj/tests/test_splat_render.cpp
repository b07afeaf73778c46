#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "splat2d/splat_render.hpp"

#include <cmath>
#include <cstring>

using namespace splat2d;
using splat2d::testing::oracle_render;

namespace {

Gaussian2D simple_gaussian(double cx, double cy, double sigma_raw, double amp) {
    Gaussian2D g;
    g.center = {cx, cy};
    g.sigma_x_raw = sigma_raw;
    g.sigma_y_raw = sigma_raw;
    g.rho_raw = 0.0;
    g.opacity_raw = 0.0;
    g.amplitude = {amp};
    return g;
}

double max_abs_diff(const FeatureGrid& a, const FeatureGrid& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    }
    return m;
}

double max_abs(const FeatureGrid& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::abs(v));
    return m;
}

bool bitwise_equal(const FeatureGrid& a, const FeatureGrid& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

RenderConfig base_cfg(int w, int h) {
    RenderConfig cfg;
    cfg.out_width = w;
    cfg.out_height = h;
    cfg.kernel_grid = 101;
    cfg.support_radius_sigmas = 4.0;
    cfg.tile_size = 16;
    cfg.normalization = Normalization::PaperLiteral;
    return cfg;
}

} // namespace

TEST_CASE("affine placement: canvas center maps to zero translation") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.5, 0.5, 0.0, 1.0));
    const auto mats = affine_placements(field, base_cfg(16, 16));
    CHECK(mats[0].m[0][2] == 0.0);
    CHECK(mats[0].m[1][2] == 0.0);
}

TEST_CASE("affine placement: origin corner maps to (-1,-1)") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.0, 0.0, 0.0, 1.0));
    const auto mats = affine_placements(field, base_cfg(8, 8));
    CHECK(mats[0].m[0][2] == -1.0);
    CHECK(mats[0].m[1][2] == -1.0);
}

TEST_CASE("affine placement: golden matrix for mu=(0.25,0.75) on 16x16") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.25, 0.75, 0.0, 1.0));
    RenderConfig cfg = base_cfg(16, 16);
    cfg.kernel_grid = 5;
    const auto mats = affine_placements(field, cfg);
    // hand-computed: scale = kernel_grid/16, translation = 2*mu - 1
    CHECK(mats[0].m[0][0] == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
    CHECK(mats[0].m[0][1] == 0.0);
    CHECK(mats[0].m[0][2] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(mats[0].m[1][0] == 0.0);
    CHECK(mats[0].m[1][1] == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
    CHECK(mats[0].m[1][2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("render_affine: pixel-centered Gaussian peaks at that pixel") {
    GaussianField field;
    // center of pixel (3,5) on a 9x9 canvas
    field.gaussians.push_back(simple_gaussian(3.5 / 9.0, 5.5 / 9.0, -2.0, 1.0));
    RenderConfig cfg = base_cfg(9, 9);
    cfg.normalization = Normalization::Unnormalized;
    const FeatureGrid img = render_affine(field, cfg);
    double best = -1.0;
    int bx = -1, by = -1;
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 9; ++x) {
            if (img.at(0, y, x) > best) {
                best = img.at(0, y, x);
                bx = x;
                by = y;
            }
        }
    }
    CHECK(bx == 3);
    CHECK(by == 5);
    CHECK(best == doctest::Approx(1.0 * sigmoid(0.0)).epsilon(1e-12));
}

TEST_CASE("render_affine: zero amplitudes render a zero grid") {
    SplitMix64 rng(3);
    GaussianField field = splat2d::testing::random_smooth_field(rng, 5, 2);
    for (auto& g : field.gaussians) g.amplitude = {0.0, 0.0};
    const FeatureGrid img = render_affine(field, base_cfg(8, 8));
    CHECK(max_abs(img) == 0.0);
}

TEST_CASE("render_affine: 4-Gaussian field agrees with the oracle at kernel_grid 101") {
    SplitMix64 rng(42);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 4, 2);
    const RenderConfig cfg = base_cfg(8, 8); // kernel_grid 101 covers the canvas
    const FeatureGrid fast = render_affine(field, cfg);
    const FeatureGrid ref = oracle_render(field, 8, 8, cfg.normalization);
    CHECK(max_abs_diff(fast, ref) < 1e-3);
    CHECK(max_abs_diff(fast, ref) < 1e-12); // window covers everything: exact
}

TEST_CASE("render_affine: small kernel window truncates far pixels to zero") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.5, 0.5, 0.0, 1.0));
    RenderConfig cfg = base_cfg(32, 32);
    cfg.kernel_grid = 3;
    cfg.normalization = Normalization::Unnormalized;
    const FeatureGrid img = render_affine(field, cfg);
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 16, 16) > 0.0);
}

TEST_CASE("render_affine: non-finite center raises domain error") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(std::nan(""), 0.5, 0.0, 1.0));
    CHECK_THROWS_AS(render_affine(field, base_cfg(8, 8)), std::domain_error);
}

TEST_CASE("render_affine: off-canvas center contributes its in-canvas tail") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(1.2, 0.5, 1.0, 1.0));
    const RenderConfig cfg = base_cfg(16, 16);
    const FeatureGrid img = render_affine(field, cfg);
    const FeatureGrid ref = oracle_render(field, 16, 16, cfg.normalization);
    CHECK(max_abs(img) > 0.0);
    CHECK(max_abs_diff(img, ref) < 1e-12);
}

TEST_CASE("render_affine_warp: rejects analytic prefactor conventions") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.5, 0.5, 0.0, 1.0));
    CHECK_THROWS_AS(render_affine_warp(field, base_cfg(8, 8)), std::invalid_argument);
}

TEST_CASE("render_affine_warp: matches analytic sampling at exact sample alignment") {
    // mu on a pixel center of an odd canvas makes the bilinear taps land on
    // kernel samples exactly; scaling the covariance by the kernel-unit to
    // domain-unit ratio makes the two paths evaluate the same exponents.
    const int n = 21;
    const int kg = 21;
    // one pixel = 10/(kg-1) kernel units and 1/n domain units
    const double units_per_domain = n * (10.0 / (kg - 1));
    const double var_units = 0.5;
    const double var_domain = var_units / (units_per_domain * units_per_domain);

    RenderConfig cfg = base_cfg(n, n);
    cfg.kernel_grid = kg;
    cfg.normalization = Normalization::Unnormalized;

    GaussianField warp_field;
    warp_field.gaussians.push_back(simple_gaussian(10.5 / n, 10.5 / n,
                                                   std::log(var_units / (1 - var_units)), 0.8));
    GaussianField analytic_field = warp_field;
    analytic_field.gaussians[0].sigma_x_raw = std::log(var_domain / (1 - var_domain));
    analytic_field.gaussians[0].sigma_y_raw = analytic_field.gaussians[0].sigma_x_raw;

    const FeatureGrid warped = render_affine_warp(warp_field, cfg);
    const FeatureGrid analytic = render_affine(analytic_field, cfg);
    CHECK(max_abs_diff(warped, analytic) < 1e-12);
    CHECK(max_abs(warped) == doctest::Approx(0.8 * 0.5).epsilon(1e-12));
}

TEST_CASE("render_tiled: generous radius matches the dense oracle") {
    SplitMix64 rng(7);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 12, 2);
    RenderConfig cfg = base_cfg(24, 24);
    cfg.support_radius_sigmas = 50.0;
    const FeatureGrid fast = render_tiled(field, cfg);
    const FeatureGrid ref = oracle_render(field, 24, 24, cfg.normalization);
    const double scale = std::max(max_abs(ref), 1.0);
    CHECK(max_abs_diff(fast, ref) / scale < 1e-12);
}

TEST_CASE("render_tiled: compact support stays inside one tile") {
    GaussianField field;
    // sigma ~ 0.0035 domain units; 4-sigma box ~ 0.014 -> well inside a tile
    Gaussian2D g = simple_gaussian(10.5 / 64.0, 10.5 / 64.0, -11.0, 1.0);
    field.gaussians.push_back(g);
    RenderConfig cfg = base_cfg(64, 64);
    cfg.tile_size = 8;
    cfg.normalization = Normalization::Unnormalized;
    const FeatureGrid img = render_tiled(field, cfg);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const bool in_tile = x >= 8 && x < 16 && y >= 8 && y < 16;
            if (!in_tile) REQUIRE(img.at(0, y, x) == 0.0);
        }
    }
    CHECK(img.at(0, 10, 10) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("render_tiled: 64-Gaussian field stays within 1e-4 of peak at 4 sigma") {
    SplitMix64 rng(2025);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 64, 2);
    const RenderConfig cfg = base_cfg(32, 32); // radius 4
    const FeatureGrid fast = render_tiled(field, cfg);
    const FeatureGrid ref = oracle_render(field, 32, 32, cfg.normalization);
    CHECK(max_abs_diff(fast, ref) < 1e-4 * max_abs(ref));
}

TEST_CASE("render_tiled: bitwise invariant to tile size and worker count") {
    SplitMix64 rng(99);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 20, 3);
    RenderConfig cfg = base_cfg(40, 28);
    const FeatureGrid base = render_tiled(field, cfg, 1);
    for (const int ts : {1, 8, 16, 64}) {
        cfg.tile_size = ts;
        for (const int threads : {1, 2, 4}) {
            const FeatureGrid other = render_tiled(field, cfg, threads);
            REQUIRE(bitwise_equal(base, other));
        }
    }
}

TEST_CASE("render_tiled: deviation from oracle shrinks as the radius grows") {
    SplitMix64 rng(31);
    GaussianField field = splat2d::testing::random_smooth_field(rng, 16, 1);
    for (auto& g : field.gaussians) g.amplitude[0] = std::abs(g.amplitude[0]);
    RenderConfig cfg = base_cfg(32, 32);
    const FeatureGrid ref = oracle_render(field, 32, 32, cfg.normalization);
    double prev = std::numeric_limits<double>::infinity();
    for (const double radius : {2.0, 3.0, 4.0, 6.0, 10.0}) {
        cfg.support_radius_sigmas = radius;
        const double dev = max_abs_diff(render_tiled(field, cfg), ref);
        REQUIRE(dev <= prev);
        prev = dev;
    }
}

TEST_CASE("render_at_scale: scale 1 reproduces the base render") {
    SplitMix64 rng(5);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 6, 1);
    const RenderConfig cfg = base_cfg(12, 12);
    CHECK(bitwise_equal(render_at_scale(field, 1.0, 12, 12, cfg),
                        render_tiled(field, cfg)));
}

TEST_CASE("render_at_scale: x2 centers interleave the base grid") {
    SplitMix64 rng(6);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 4, 1);
    RenderConfig cfg = base_cfg(4, 4);
    cfg.support_radius_sigmas = 50.0;
    const FeatureGrid up = render_at_scale(field, 2.0, 4, 4, cfg);
    REQUIRE(up.width == 8);
    REQUIRE(up.height == 8);
    // fine pixel (2i, 2j) center = (2i+0.5)/8, between base centers; check
    // every fine center against the point oracle directly
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const auto v = render_point({(x + 0.5) / 8.0, (y + 0.5) / 8.0}, field);
            REQUIRE(up.at(0, y, x) == doctest::Approx(v[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("render_at_scale: x3.3 on a 10x10 base agrees with the oracle") {
    SplitMix64 rng(8);
    const GaussianField field = splat2d::testing::random_smooth_field(rng, 9, 2);
    RenderConfig cfg = base_cfg(10, 10);
    cfg.support_radius_sigmas = 50.0;
    const FeatureGrid up = render_at_scale(field, 3.3, 10, 10, cfg);
    REQUIRE(up.width == 33);
    REQUIRE(up.height == 33);
    const FeatureGrid ref = oracle_render(field, 33, 33, cfg.normalization);
    CHECK(max_abs_diff(up, ref) < 1e-12 * std::max(1.0, max_abs(ref)));
}

TEST_CASE("render_at_scale: rounded dimensions for the paper's scale list") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.5, 0.5, 0.0, 1.0));
    const RenderConfig cfg = base_cfg(24, 24);
    const double scales[] = {1.5, 2.4, 3.3, 3.6, 10.0};
    const int expected[] = {36, 58, 79, 86, 240};
    for (int i = 0; i < 5; ++i) {
        const FeatureGrid img = render_at_scale(field, scales[i], 24, 24, cfg);
        REQUIRE(img.width == expected[i]);
        REQUIRE(img.height == expected[i]);
    }
}

TEST_CASE("render_at_scale: degenerate output throws") {
    GaussianField field;
    field.gaussians.push_back(simple_gaussian(0.5, 0.5, 0.0, 1.0));
    CHECK_THROWS_AS(render_at_scale(field, 0.01, 10, 10, base_cfg(10, 10)),
                    std::domain_error);
}

TEST_CASE("render config validation") {
    RenderConfig cfg = base_cfg(8, 8);
    cfg.kernel_grid = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_cfg(8, 8);
    cfg.support_radius_sigmas = 0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_cfg(8, 8);
    cfg.tile_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_cfg(0, 8);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
