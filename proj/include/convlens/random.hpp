#pragma once

#include <cstdint>

namespace convlens {

// SplitMix64 stream. All stochastic components of the library draw from this
// generator so that results are bit-reproducible across platforms for a
// fixed seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound), bound >= 1. Modulo bias is irrelevant
    // for the small bounds used here but reproducibility matters, so the
    // reduction is fixed to a plain modulo.
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::uint64_t next_range(std::uint64_t lo, std::uint64_t hi) {
        return lo + next_below(hi - lo + 1);
    }

    // Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

} // namespace convlens
