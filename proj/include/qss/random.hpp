#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace qss {

// All randomness in the library flows through an injected mt19937_64 so that a
// (scenario, seed) pair replays byte-identically.  std::uniform_*_distribution
// is implementation-defined, so the draws below are spelled out by hand.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) via rejection sampling; bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

/// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Samples an index proportionally to the given nonnegative weights.
inline std::size_t sample_index(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("sample_index: weights sum to zero");
    const double u = uniform_unit(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;  // u landed on the rounding tail
}

}  // namespace qss
