#pragma once

#include <cstdint>

namespace chsep {

/// splitmix64. Fixed algorithm so seeded sweeps are bit-identical across
/// standard libraries (std::uniform_real_distribution is not).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    /// Uniform in [-1,1).
    double symmetric() { return 2.0 * next_double() - 1.0; }
};

} // namespace chsep
