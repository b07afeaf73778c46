#include "splat2d/autograd.hpp"

#include "splat2d/threading.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace splat2d {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_shapes(const FeatureGrid& a, const FeatureGrid& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}
} // namespace

double loss_l1(const FeatureGrid& pred, const FeatureGrid& target) {
    check_shapes(pred, target, "loss_l1");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        acc += std::abs(pred.data[i] - target.data[i]);
    }
    return acc / static_cast<double>(pred.data.size());
}

FeatureGrid loss_l1_grad(const FeatureGrid& pred, const FeatureGrid& target) {
    check_shapes(pred, target, "loss_l1_grad");
    FeatureGrid g(pred.channels, pred.height, pred.width, 0.0);
    const double inv_n = 1.0 / static_cast<double>(pred.data.size());
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double r = pred.data[i] - target.data[i];
        g.data[i] = r > 0.0 ? inv_n : (r < 0.0 ? -inv_n : 0.0);
    }
    return g;
}

ParamGradients backward(const GaussianField& field, const RenderConfig& cfg,
                        const FeatureGrid& loss_grad, int threads) {
    cfg.validate();
    if (field.empty()) {
        throw std::invalid_argument("backward: empty field");
    }
    const int w = cfg.out_width;
    const int h = cfg.out_height;
    const int nch = field.channels();
    if (loss_grad.channels != nch || loss_grad.height != h || loss_grad.width != w) {
        throw std::invalid_argument("backward: loss_grad shape mismatch");
    }

    FeatureGrid upstream = loss_grad;
    if (cfg.clamp_output) {
        // clamp subgradient: zero where the unclamped forward leaves [0,1]
        RenderConfig unclamped = cfg;
        unclamped.clamp_output = false;
        const FeatureGrid raw = render_tiled(field, unclamped, threads);
        for (std::size_t i = 0; i < raw.data.size(); ++i) {
            if (raw.data[i] < 0.0 || raw.data[i] > 1.0) upstream.data[i] = 0.0;
        }
    }

    ParamGradients out;
    out.per_gaussian.assign(field.size(), GaussianGrad{});

    parallel_for_blocks(field.size(), threads, [&](std::size_t gi) {
        const Gaussian2D& g = field.gaussians[gi];
        const Activated act = activate(g);
        const double a = act.cov.var_x;
        const double b = act.cov.var_y;
        const double c = act.cov.cov_xy;
        const double det = act.cov.det();
        const double alpha = act.opacity;
        double z = 1.0;
        double dlogz_ddet = 0.0; // d(log Z)/d(det)
        switch (cfg.normalization) {
            case Normalization::PaperLiteral:
                z = 1.0 / (kTwoPi * det);
                dlogz_ddet = -1.0 / det;
                break;
            case Normalization::Standard:
                z = 1.0 / (kTwoPi * std::sqrt(det));
                dlogz_ddet = -0.5 / det;
                break;
            case Normalization::Unnormalized:
                break;
        }

        GaussianGrad& gg = out.per_gaussian[gi];
        gg.d_amplitude.assign(static_cast<std::size_t>(nch), 0.0);
        double grad_a = 0.0, grad_b = 0.0, grad_c = 0.0, grad_alpha = 0.0;

        const PixelBox box = support_box(g.center, act.cov, cfg.support_radius_sigmas, w, h);
        for (int iy = box.y0; iy <= box.y1; ++iy) {
            for (int ix = box.x0; ix <= box.x1; ++ix) {
                const Vec2 p = pixel_center(ix, iy, w, h);
                const double dx = p.x - g.center.x;
                const double dy = p.y - g.center.y;
                const double q = (b * dx * dx - 2.0 * c * dx * dy + a * dy * dy) / det;
                const double exponent = -0.5 * q;
                if (exponent < kExponentFloor) continue;
                const double f = z * std::exp(exponent);
                // s = sum_k upstream[k] * amplitude[k]
                double s = 0.0;
                for (int k = 0; k < nch; ++k) {
                    const double gk = upstream.at(k, iy, ix);
                    s += gk * g.amplitude[static_cast<std::size_t>(k)];
                    gg.d_amplitude[static_cast<std::size_t>(k)] += gk * f * alpha;
                }
                const double u = alpha * s; // dL/df at this pixel
                const double common = u * f;
                gg.d_center_x += common * (b * dx - c * dy) / det;
                gg.d_center_y += common * (a * dy - c * dx) / det;
                const double dq_da = (dy * dy - q * b) / det;
                const double dq_db = (dx * dx - q * a) / det;
                const double dq_dc = (-2.0 * dx * dy + 2.0 * q * c) / det;
                grad_a += common * (dlogz_ddet * b - 0.5 * dq_da);
                grad_b += common * (dlogz_ddet * a - 0.5 * dq_db);
                grad_c += common * (dlogz_ddet * (-2.0 * c) - 0.5 * dq_dc);
                grad_alpha += f * s;
            }
        }

        // chain through the activations
        const double t = std::tanh(g.rho_raw);
        const double scale = (1.0 - kEpsPsd);
        const double dc_da = 0.5 * t * scale * std::sqrt(b / a);
        const double dc_db = 0.5 * t * scale * std::sqrt(a / b);
        const double dc_drho = (1.0 - t * t) * std::sqrt(a * b) * scale;
        gg.d_sigma_x_raw = (grad_a + grad_c * dc_da) * a * (1.0 - a);
        gg.d_sigma_y_raw = (grad_b + grad_c * dc_db) * b * (1.0 - b);
        gg.d_rho_raw = grad_c * dc_drho;
        gg.d_opacity_raw = grad_alpha * alpha * (1.0 - alpha);
    });

    return out;
}

StepOutcome adam_step(std::span<double> params, std::span<const double> grads,
                      OptimState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: size mismatch");
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            return {false, "non-finite gradient at parameter " + std::to_string(i)};
        }
    }
    const long t = state.step_count + 1;
    double lr = cfg.lr;
    if (cfg.halve_every > 0) {
        lr *= std::pow(0.5, static_cast<double>(state.step_count / cfg.halve_every));
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mh = state.m[i] / bc1;
        const double vh = state.v[i] / bc2;
        params[i] -= lr * mh / (std::sqrt(vh) + cfg.eps);
    }
    state.step_count = t;
    return {};
}

std::vector<double> pack_params(const GaussianField& field) {
    const int nch = field.channels();
    std::vector<double> out;
    out.reserve(field.size() * (6 + static_cast<std::size_t>(nch)));
    for (const Gaussian2D& g : field.gaussians) {
        out.push_back(g.center.x);
        out.push_back(g.center.y);
        out.push_back(g.sigma_x_raw);
        out.push_back(g.sigma_y_raw);
        out.push_back(g.rho_raw);
        out.push_back(g.opacity_raw);
        out.insert(out.end(), g.amplitude.begin(), g.amplitude.end());
    }
    return out;
}

void unpack_params(std::span<const double> params, GaussianField& field) {
    const std::size_t nch = static_cast<std::size_t>(field.channels());
    std::size_t i = 0;
    for (Gaussian2D& g : field.gaussians) {
        g.center.x = params[i++];
        g.center.y = params[i++];
        g.sigma_x_raw = params[i++];
        g.sigma_y_raw = params[i++];
        g.rho_raw = params[i++];
        g.opacity_raw = params[i++];
        for (std::size_t k = 0; k < nch; ++k) g.amplitude[k] = params[i++];
    }
    if (i != params.size()) {
        throw std::invalid_argument("unpack_params: size mismatch");
    }
}

std::vector<double> pack_grads(const ParamGradients& grads, int channels) {
    std::vector<double> out;
    out.reserve(grads.per_gaussian.size() * (6 + static_cast<std::size_t>(channels)));
    for (const GaussianGrad& g : grads.per_gaussian) {
        out.push_back(g.d_center_x);
        out.push_back(g.d_center_y);
        out.push_back(g.d_sigma_x_raw);
        out.push_back(g.d_sigma_y_raw);
        out.push_back(g.d_rho_raw);
        out.push_back(g.d_opacity_raw);
        out.insert(out.end(), g.d_amplitude.begin(), g.d_amplitude.end());
    }
    return out;
}

namespace {

double psnr_of(const FeatureGrid& a, const FeatureGrid& b) {
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

void apply_freeze(ParamGradients& grads, const FitOptions& opt) {
    for (GaussianGrad& g : grads.per_gaussian) {
        if (!opt.train_center) { g.d_center_x = 0.0; g.d_center_y = 0.0; }
        if (!opt.train_sigma) { g.d_sigma_x_raw = 0.0; g.d_sigma_y_raw = 0.0; }
        if (!opt.train_rho) g.d_rho_raw = 0.0;
        if (!opt.train_opacity) g.d_opacity_raw = 0.0;
        if (!opt.train_amplitude) {
            std::fill(g.d_amplitude.begin(), g.d_amplitude.end(), 0.0);
        }
    }
}

} // namespace

FitResult fit_field(const FeatureGrid& target, GaussianField init,
                    const RenderConfig& cfg, const FitOptions& opt) {
    if (opt.steps < 1) {
        throw std::invalid_argument("fit_field: steps must be >= 1");
    }
    RenderConfig rc = cfg.with_output(target.width, target.height);
    FitResult result;
    result.field = std::move(init);

    AdamConfig adam;
    adam.lr = opt.lr;
    adam.halve_every = opt.halve_every;
    OptimState state;
    std::vector<double> params = pack_params(result.field);

    for (int step = 0; step <= opt.steps; ++step) {
        const FeatureGrid pred = render_tiled(result.field, rc, opt.threads);
        const double loss = loss_l1(pred, target);
        result.trace.push_back({step, loss, psnr_of(pred, target)});
        if (step == opt.steps) break;

        ParamGradients grads = backward(result.field, rc, loss_l1_grad(pred, target),
                                        opt.threads);
        apply_freeze(grads, opt);
        const std::vector<double> flat = pack_grads(grads, target.channels);
        const StepOutcome outcome = adam_step(params, flat, state, adam);
        if (!outcome.applied) {
            ++result.rejected_steps;
            continue;
        }
        unpack_params(params, result.field);
    }
    return result;
}

void write_trace_csv(const std::string& path, const std::vector<FitTraceRow>& trace) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_trace_csv: cannot open " + path);
    }
    out << "step,loss,psnr\n";
    for (const FitTraceRow& row : trace) {
        out << row.step << ',' << row.loss << ',' << row.psnr_db << '\n';
    }
}

} // namespace splat2d
