#include "splat2d/kernel_bank.hpp"

#include "splat2d/gauss_core.hpp"
#include "splat2d/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace splat2d {

SelectionLogits::SelectionLogits(int h, int w, int k, double fill)
    : height(h), width(w), classes(k) {
    if (h < 1 || w < 1 || k < 1) {
        throw std::invalid_argument("SelectionLogits: dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(h) * w * k, fill);
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

double ramp(int i, int n, double lo, double hi) {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / (n - 1);
}

void check_selection_shape(const SelectionLogits& logits, const GaussianBank& bank) {
    if (bank.size() < 1) {
        throw std::invalid_argument("selection: empty bank");
    }
    if (logits.classes != bank.size()) {
        throw std::invalid_argument("selection: logits classes != bank size");
    }
}

} // namespace

GaussianBank init_bank(int k, std::uint64_t seed) {
    if (k < 1) {
        throw std::invalid_argument("init_bank: K must be >= 1");
    }
    GaussianBank bank;
    bank.prototypes.reserve(static_cast<std::size_t>(k));
    const int n_sigma = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    const int n_opacity = (k + n_sigma - 1) / n_sigma;
    const double sigma_lo = kBankSigmaMinPixels / kBankReferenceGrid;
    const double sigma_hi = kBankSigmaMaxPixels / kBankReferenceGrid;
    for (int p = 0; p < k; ++p) {
        const int i = p / n_opacity;
        const int j = p % n_opacity;
        const double sigma = ramp(i, n_sigma, sigma_lo, sigma_hi);
        const double opacity = ramp(j, n_opacity, kBankOpacityMin, kBankOpacityMax);
        BankPrototype proto;
        proto.sigma_x_raw = logit(sigma * sigma);
        proto.sigma_y_raw = proto.sigma_x_raw;
        proto.rho_raw = 0.0;
        proto.opacity_raw = logit(opacity);
        bank.prototypes.push_back(proto);
    }
    bank.init_scheme = "stepwise-k" + std::to_string(k) + "-seed" + std::to_string(seed);
    return bank;
}

SoftSelection gumbel_soft_select(const SelectionLogits& logits, const GaussianBank& bank,
                                 double tau, std::uint64_t seed) {
    check_selection_shape(logits, bank);
    if (!(tau > 0.0)) {
        throw std::invalid_argument("gumbel_soft_select: tau must be > 0");
    }
    const int k = bank.size();
    SoftSelection sel;
    sel.height = logits.height;
    sel.width = logits.width;
    sel.classes = k;
    sel.tau = tau;
    sel.seed = seed;
    const std::size_t pixels = static_cast<std::size_t>(logits.pixels());
    sel.weights.assign(pixels * k, 0.0);
    sel.effective.assign(pixels, BankPrototype{});

    std::vector<double> noised(static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < pixels; ++p) {
        double peak = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double noise = stateless_gumbel(seed, p * k + static_cast<std::size_t>(j));
            noised[static_cast<std::size_t>(j)] = logits.data[p * k + j] + noise;
            peak = std::max(peak, noised[static_cast<std::size_t>(j)]);
        }
        double denom = 0.0;
        for (int j = 0; j < k; ++j) {
            const double e = std::exp((noised[static_cast<std::size_t>(j)] - peak) / tau);
            sel.weights[p * k + j] = e;
            denom += e;
        }
        BankPrototype& eff = sel.effective[p];
        for (int j = 0; j < k; ++j) {
            const double w = sel.weights[p * k + j] / denom;
            sel.weights[p * k + j] = w;
            const BankPrototype& proto = bank.prototypes[static_cast<std::size_t>(j)];
            eff.sigma_x_raw += w * proto.sigma_x_raw;
            eff.sigma_y_raw += w * proto.sigma_y_raw;
            eff.rho_raw += w * proto.rho_raw;
            eff.opacity_raw += w * proto.opacity_raw;
        }
    }
    return sel;
}

namespace {

HardSelection hard_select_impl(const SelectionLogits& logits, const GaussianBank& bank,
                               bool noised, std::uint64_t seed) {
    check_selection_shape(logits, bank);
    const int k = bank.size();
    HardSelection sel;
    sel.height = logits.height;
    sel.width = logits.width;
    const std::size_t pixels = static_cast<std::size_t>(logits.pixels());
    sel.indices.resize(pixels);
    sel.params.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
        int best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            double v = logits.data[p * k + j];
            if (noised) v += stateless_gumbel(seed, p * k + static_cast<std::size_t>(j));
            if (v > best_val) { // strict: ties keep the lowest index
                best_val = v;
                best = j;
            }
        }
        sel.indices[p] = best;
        sel.params[p] = bank.prototypes[static_cast<std::size_t>(best)];
    }
    return sel;
}

} // namespace

HardSelection hard_select(const SelectionLogits& logits, const GaussianBank& bank) {
    return hard_select_impl(logits, bank, false, 0);
}

HardSelection hard_select_noised(const SelectionLogits& logits, const GaussianBank& bank,
                                 std::uint64_t seed) {
    return hard_select_impl(logits, bank, true, seed);
}

std::vector<double> straight_through_grad(const SoftSelection& sel,
                                          std::span<const double> weight_grad) {
    if (weight_grad.size() != sel.weights.size()) {
        throw std::invalid_argument("straight_through_grad: size mismatch");
    }
    const int k = sel.classes;
    std::vector<double> out(sel.weights.size(), 0.0);
    const std::size_t pixels = sel.weights.size() / static_cast<std::size_t>(k);
    for (std::size_t p = 0; p < pixels; ++p) {
        double inner = 0.0; // sum_j w_j * g_j
        for (int j = 0; j < k; ++j) {
            inner += sel.weights[p * k + j] * weight_grad[p * k + j];
        }
        for (int j = 0; j < k; ++j) {
            const double w = sel.weights[p * k + j];
            out[p * k + j] = w * (weight_grad[p * k + j] - inner) / sel.tau;
        }
    }
    return out;
}

SelectionGrads backprop_selection(const SoftSelection& sel, const GaussianBank& bank,
                                  std::span<const BankPrototype> d_effective) {
    if (d_effective.size() != sel.effective.size()) {
        throw std::invalid_argument("backprop_selection: size mismatch");
    }
    const int k = sel.classes;
    SelectionGrads out;
    out.prototypes.assign(bank.prototypes.size(), BankPrototype{});
    std::vector<double> weight_grad(sel.weights.size(), 0.0);
    for (std::size_t p = 0; p < d_effective.size(); ++p) {
        const BankPrototype& de = d_effective[p];
        for (int j = 0; j < k; ++j) {
            const BankPrototype& proto = bank.prototypes[static_cast<std::size_t>(j)];
            weight_grad[p * k + j] = de.sigma_x_raw * proto.sigma_x_raw +
                                     de.sigma_y_raw * proto.sigma_y_raw +
                                     de.rho_raw * proto.rho_raw +
                                     de.opacity_raw * proto.opacity_raw;
            const double w = sel.weight(static_cast<int>(p), j);
            BankPrototype& pg = out.prototypes[static_cast<std::size_t>(j)];
            pg.sigma_x_raw += w * de.sigma_x_raw;
            pg.sigma_y_raw += w * de.sigma_y_raw;
            pg.rho_raw += w * de.rho_raw;
            pg.opacity_raw += w * de.opacity_raw;
        }
    }
    out.logits = straight_through_grad(sel, weight_grad);
    return out;
}

std::vector<long> selection_histogram(std::span<const int> indices, int k) {
    std::vector<long> counts(static_cast<std::size_t>(k), 0);
    for (int idx : indices) {
        if (idx < 0 || idx >= k) {
            throw std::invalid_argument("selection_histogram: index out of range");
        }
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

void write_histogram_csv(const std::string& path, std::span<const long> counts) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_histogram_csv: cannot open " + path);
    }
    out << "index,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << i << ',' << counts[i] << '\n';
    }
}

void dump_bank(const std::string& path, const GaussianBank& bank) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("dump_bank: cannot open " + path);
    }
    out.precision(17);
    out << "splat2d-bank v1 k=" << bank.size() << " scheme=" << bank.init_scheme << '\n';
    out << "# index sigma_x_raw sigma_y_raw rho_raw opacity_raw sigma_x sigma_y corr opacity\n";
    for (int i = 0; i < bank.size(); ++i) {
        const BankPrototype& p = bank.prototypes[static_cast<std::size_t>(i)];
        const double vx = sigmoid(p.sigma_x_raw);
        const double vy = sigmoid(p.sigma_y_raw);
        out << i << ' ' << p.sigma_x_raw << ' ' << p.sigma_y_raw << ' ' << p.rho_raw
            << ' ' << p.opacity_raw << ' ' << std::sqrt(vx) << ' ' << std::sqrt(vy)
            << ' ' << std::tanh(p.rho_raw) << ' ' << sigmoid(p.opacity_raw) << '\n';
    }
}

GaussianBank load_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_bank: cannot open " + path);
    }
    std::string header;
    std::getline(in, header);
    if (header.rfind("splat2d-bank v1", 0) != 0) {
        throw std::runtime_error("load_bank: bad header in " + path);
    }
    GaussianBank bank;
    const auto scheme_pos = header.find("scheme=");
    if (scheme_pos != std::string::npos) {
        bank.init_scheme = header.substr(scheme_pos + 7);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        int idx = 0;
        BankPrototype p;
        if (!(row >> idx >> p.sigma_x_raw >> p.sigma_y_raw >> p.rho_raw >> p.opacity_raw)) {
            throw std::runtime_error("load_bank: malformed row in " + path);
        }
        bank.prototypes.push_back(p);
    }
    if (bank.prototypes.empty()) {
        throw std::runtime_error("load_bank: no prototypes in " + path);
    }
    return bank;
}

} // namespace splat2d
