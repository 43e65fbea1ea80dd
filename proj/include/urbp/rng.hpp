#pragma once

#include <cstdint>
#include <vector>

namespace urbp {

// Counter-based deterministic RNG built on the splitmix64 finalizer.
// Every draw is a pure function of (seed, stream tags, counter), so arm paths,
// tie-breaks and perturbations are reproducible and independent of scheduling.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix_u64(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL));
}

inline uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c) {
    return mix_u64(mix_u64(a, b), c);
}

inline uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix_u64(mix_u64(a, b, c), d);
}

// Uniform double in [0, 1) from a 64-bit word (53-bit mantissa).
inline double u64_to_unit(uint64_t x) {
    return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform01(uint64_t seed, uint64_t s1, uint64_t s2) {
    return u64_to_unit(mix_u64(seed, s1, s2));
}

inline double uniform01(uint64_t seed, uint64_t s1, uint64_t s2, uint64_t s3) {
    return u64_to_unit(mix_u64(seed, s1, s2, s3));
}

// Sample an index from a discrete distribution by CDF inversion.
// `dist` need not be exactly normalized; the last index absorbs residual mass.
inline int sample_discrete(const std::vector<double>& dist, double u) {
    double acc = 0.0;
    const int n = static_cast<int>(dist.size());
    for (int i = 0; i < n; ++i) {
        acc += dist[i];
        if (u < acc) return i;
    }
    return n - 1;
}

}  // namespace urbp
