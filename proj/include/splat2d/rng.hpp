#pragma once

#include <cmath>
#include <cstdint>

namespace splat2d {

// splitmix64 scramble. Every random draw in the project routes through this
// so that streams are reproducible across platforms and mirrorable in other
// languages for golden-value verification.
inline std::uint64_t sm64_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kGolden64;
        return sm64_finalize(state_);
    }

    // strictly inside (0,1)
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one value per call (pairs are not cached so streams stay
    // position-independent)
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// Order-independent draw: the value depends only on (seed, idx), never on how
// many draws happened before. Safe under any parallel schedule.
inline double stateless_u01(std::uint64_t seed, std::uint64_t idx) {
    const std::uint64_t z = seed + (idx + 1) * kGolden64;
    return (static_cast<double>(sm64_finalize(z) >> 11) + 0.5) * 0x1.0p-53;
}

inline double stateless_gumbel(std::uint64_t seed, std::uint64_t idx) {
    return -std::log(-std::log(stateless_u01(seed, idx)));
}

} // namespace splat2d
