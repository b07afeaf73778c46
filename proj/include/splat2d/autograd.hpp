#pragma once

#include "splat2d/feature_grid.hpp"
#include "splat2d/gauss_core.hpp"
#include "splat2d/splat_render.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace splat2d {

// Gradient of the loss w.r.t. one Gaussian's raw parameters.
struct GaussianGrad {
    double d_center_x = 0.0;
    double d_center_y = 0.0;
    double d_sigma_x_raw = 0.0;
    double d_sigma_y_raw = 0.0;
    double d_rho_raw = 0.0;
    double d_opacity_raw = 0.0;
    std::vector<double> d_amplitude;
};

struct ParamGradients {
    std::vector<GaussianGrad> per_gaussian;
    // filled by selection-aware paths (see kernel_bank); empty otherwise
    std::vector<double> logit_grads;
};

// Mean absolute difference over all entries. Throws on shape mismatch.
double loss_l1(const FeatureGrid& pred, const FeatureGrid& target);

// d(loss_l1)/d(pred): sign(pred - target) / N.
FeatureGrid loss_l1_grad(const FeatureGrid& pred, const FeatureGrid& target);

// Reverse pass through rendering: given dL/d(output grid), returns dL/d(raw
// parameter) for every Gaussian. Uses exactly the support truncation of
// render_tiled (same boxes, same exponent floor). When cfg.clamp_output is
// set, the forward grid is recomputed and upstream gradients are zeroed where
// the unclamped value falls outside [0,1].
ParamGradients backward(const GaussianField& field, const RenderConfig& cfg,
                        const FeatureGrid& loss_grad, int threads = 1);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    // learning rate is halved every this many steps; 0 disables the schedule
    int halve_every = 0;
};

struct OptimState {
    std::vector<double> m;
    std::vector<double> v;
    long step_count = 0;
};

struct StepOutcome {
    bool applied = true;
    std::string note;
};

// One Adam update with bias correction. A non-finite gradient rejects the
// whole step (parameters and moments untouched) and reports which entry.
StepOutcome adam_step(std::span<double> params, std::span<const double> grads,
                      OptimState& state, const AdamConfig& cfg);

// Per-parameter-group freeze flags for fitting. A frozen group's gradients
// are zeroed before the optimizer step.
struct FitOptions {
    int steps = 500;
    double lr = 1e-2;
    bool train_center = true;
    bool train_sigma = true;
    bool train_rho = true;
    bool train_opacity = true;
    bool train_amplitude = true;
    int halve_every = 0;
    int threads = 1;
};

struct FitTraceRow {
    int step = 0;
    double loss = 0.0;
    double psnr_db = 0.0;
};

struct FitResult {
    GaussianField field;
    std::vector<FitTraceRow> trace; // steps+1 rows; row i is pre-update at step i
    long rejected_steps = 0;
};

// render -> L1 -> backward -> Adam loop over a single field.
FitResult fit_field(const FeatureGrid& target, GaussianField init,
                    const RenderConfig& cfg, const FitOptions& opt);

// Flattened parameter vector of a field, order per Gaussian:
// center_x, center_y, sigma_x_raw, sigma_y_raw, rho_raw, opacity_raw, amplitude[0..k)
std::vector<double> pack_params(const GaussianField& field);
void unpack_params(std::span<const double> params, GaussianField& field);
std::vector<double> pack_grads(const ParamGradients& grads, int channels);

// "step,loss,psnr\n" rows
void write_trace_csv(const std::string& path, const std::vector<FitTraceRow>& trace);

} // namespace splat2d
