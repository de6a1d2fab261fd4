#pragma once

#include <cstdint>
#include <cmath>

namespace bragg {

// Counter-based PRNG (splitmix64). Used instead of std:: engines so that
// sampled values are identical across platforms and thread counts.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in (0, 1]; never returns 0 so log() below is safe
    double uniform() {
        return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // standard normal via Box-Muller
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }
};

// Mixes a base seed with stream indices into an independent substream seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
    SplitMix64 g(seed ^ (a * 0x9e3779b97f4a7c15ull) ^ (b * 0xc2b2ae3d27d4eb4full));
    g.next();
    return g.next();
}

} // namespace bragg
