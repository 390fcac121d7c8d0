#pragma once
#include <cstdint>

namespace fanoshg {

// SplitMix64. Chosen over std::mt19937 because the search/validation
// machinery freezes expected values across implementations, and the standard
// library's distributions are not bit-stable across toolchains. The raw
// stream below is reproducible everywhere from the seed alone.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 significant bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [a, b).
    double range(double a, double b) { return a + (b - a) * uniform(); }
};

} // namespace fanoshg
