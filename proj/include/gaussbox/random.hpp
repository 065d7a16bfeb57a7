#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gaussbox {

/// Uniform double in [0, 1). Derived directly from the mt19937_64 stream so
/// sequences do not depend on the standard library's distribution internals.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal draw via Box-Muller. Consumes exactly two words of the
/// stream per call, which keeps seeded sequences stable.
inline double normal01(std::mt19937_64& rng) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gaussbox
