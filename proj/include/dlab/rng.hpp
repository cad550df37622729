#pragma once
// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter, slot), so Monte Carlo paths are reproducible
// regardless of scheduling or path count.

#include "dlab/common.hpp"

namespace dlab {

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t counter_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (a + 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ (b + 0x94d049bb133111ebULL));
    h = mix64(h ^ (c + 0x2545f4914f6cdd1dULL));
    return h;
}

// uniform in the open interval (0,1)
inline double u01(std::uint64_t bits) { return ((bits >> 11) + 0.5) * 0x1.0p-53; }

struct CounterRng {
    std::uint64_t seed = 0;

    // two independent standard normals for (stream, counter, slot) via Box-Muller
    std::pair<double, double> normal_pair(std::uint64_t stream, std::uint64_t counter,
                                          std::uint64_t slot = 0) const {
        double r1 = u01(counter_key(seed, stream, counter, 2 * slot));
        double r2 = u01(counter_key(seed, stream, counter, 2 * slot + 1));
        double rad = std::sqrt(-2.0 * std::log(r1));
        return {rad * std::cos(TWO_PI * r2), rad * std::sin(TWO_PI * r2)};
    }

    double uniform(std::uint64_t stream, std::uint64_t counter, std::uint64_t slot = 0) const {
        return u01(counter_key(seed, stream, counter, slot));
    }
};

}  // namespace dlab
