#pragma once

#include <cstdint>

namespace gyrolim {

// Deterministic, platform-independent RNG. std::uniform_real_distribution is
// implementation-defined, which would break the byte-identical-rerun contract,
// so uniforms are produced directly from the raw 64-bit stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so that nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next_u64();
    }

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller (always consumes two uniforms)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // stream derived from a master seed and an index (per sweep cell, per worker)
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
        Rng r(master ^ (0x632be59bd9b4e019ull * (index + 1)));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

} // namespace gyrolim
