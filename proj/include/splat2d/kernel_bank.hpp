#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace splat2d {

// One shared kernel prototype: raw (pre-activation) shape and opacity.
struct BankPrototype {
    double sigma_x_raw = 0.0;
    double sigma_y_raw = 0.0;
    double rho_raw = 0.0;
    double opacity_raw = 0.0;
};

struct GaussianBank {
    std::vector<BankPrototype> prototypes;
    std::string init_scheme;

    int size() const { return static_cast<int>(prototypes.size()); }
};

// Stepwise initialization constants: activated scales span
// [kBankSigmaMinPixels, kBankSigmaMaxPixels] pixel widths on a
// kBankReferenceGrid-sized grid, crossed with an opacity ramp.
inline constexpr double kBankSigmaMinPixels = 0.3;
inline constexpr double kBankSigmaMaxPixels = 3.0;
inline constexpr int kBankReferenceGrid = 48;
inline constexpr double kBankOpacityMin = 0.1;
inline constexpr double kBankOpacityMax = 0.9;

// Deterministic stepwise bank: a sigma ramp crossed with an opacity ramp,
// rho_raw = 0 everywhere. K = 1 degenerates to the midpoint of both ramps.
// Throws std::invalid_argument for K < 1.
GaussianBank init_bank(int k, std::uint64_t seed);

// Per-pixel K-vector of selection logits for an H x W grid.
struct SelectionLogits {
    int height = 0;
    int width = 0;
    int classes = 0;
    std::vector<double> data; // pixel-major: (y * width + x) * classes + k

    SelectionLogits() = default;
    SelectionLogits(int h, int w, int k, double fill = 0.0);
    double& at(int y, int x, int k) {
        return data[(static_cast<std::size_t>(y) * width + x) * classes + k];
    }
    double at(int y, int x, int k) const {
        return data[(static_cast<std::size_t>(y) * width + x) * classes + k];
    }
    int pixels() const { return height * width; }
};

// Result of soft (Gumbel) selection: convex weights over the bank per pixel
// and the weight-averaged raw prototype parameters.
struct SoftSelection {
    int height = 0;
    int width = 0;
    int classes = 0;
    double tau = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> weights;          // pixel-major, sums to 1 per pixel
    std::vector<BankPrototype> effective; // one per pixel

    double weight(int pixel, int k) const {
        return weights[static_cast<std::size_t>(pixel) * classes + k];
    }
};

// w = softmax((logits + G)/tau) with per-(pixel,class) Gumbel noise drawn
// statelessly from the seed; deterministic under any parallel schedule.
SoftSelection gumbel_soft_select(const SelectionLogits& logits, const GaussianBank& bank,
                                 double tau, std::uint64_t seed);

struct HardSelection {
    int height = 0;
    int width = 0;
    std::vector<int> indices;             // argmax per pixel, ties -> lowest
    std::vector<BankPrototype> params;    // copied from the selected prototype
};

// Noise-free argmax selection (inference path).
HardSelection hard_select(const SelectionLogits& logits, const GaussianBank& bank);

// Hard forward on noised logits (straight-through mode): picks
// argmax(logits + G) with the same noise stream as gumbel_soft_select.
HardSelection hard_select_noised(const SelectionLogits& logits, const GaussianBank& bank,
                                 std::uint64_t seed);

// Softmax-Jacobian backward at temperature tau: given dL/dw for every pixel
// and class, returns dL/dlogits (same layout).
std::vector<double> straight_through_grad(const SoftSelection& sel,
                                          std::span<const double> weight_grad);

// Gradients w.r.t. the raw prototype parameters, mirrored as BankPrototype.
struct SelectionGrads {
    std::vector<double> logits;            // pixel-major * classes
    std::vector<BankPrototype> prototypes; // one per bank entry
};

// Backward of the weighted-average parameter mixing: given dL/d(effective raw
// params) per pixel, produces logit gradients (through the softmax Jacobian)
// and prototype gradients (weight-weighted sums).
SelectionGrads backprop_selection(const SoftSelection& sel, const GaussianBank& bank,
                                  std::span<const BankPrototype> d_effective);

// Counts per bank index; the vector length is k.
std::vector<long> selection_histogram(std::span<const int> indices, int k);

void write_histogram_csv(const std::string& path, std::span<const long> counts);

// "index sigma_x_raw sigma_y_raw rho_raw opacity_raw sigma_x sigma_y corr opacity"
// rows; loads read the raw columns.
void dump_bank(const std::string& path, const GaussianBank& bank);
GaussianBank load_bank(const std::string& path);

} // namespace splat2d
