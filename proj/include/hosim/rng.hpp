#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "hosim/core.hpp"

namespace hosim {

// splitmix64: used only to derive stream seeds, never to draw samples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seed-splitting scheme: every independent stream is identified by the
// master seed plus a textual label ("topology", "ue/3", "train", ...).
// The derived seed is splitmix64(master ^ fnv1a(label)).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return splitmix64(master ^ fnv1a64(label));
}

// Deterministic random stream. All draw primitives are implemented here
// rather than with std distributions so that sequences are fixed by the
// seed alone, independent of the standard library in use.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Exponential(1), clamped away from 0 so -10*log10(E) stays finite.
    double exponential() {
        double e = -std::log1p(-uniform01());
        return e < 1e-12 ? 1e-12 : e;
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % n;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace hosim
