// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace iscsc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tuple of indices.
template <typename... Ts>
std::uint64_t mix_seed(std::uint64_t base, Ts... parts) {
    std::uint64_t h = splitmix64(base);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
}

/// Seeded generator; the only source of randomness in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    /// Circular complex Gaussian with E|z|^2 = variance.
    cd complex_normal(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    CVec complex_normal_vector(int n, double variance) {
        CVec v(n);
        for (int i = 0; i < n; ++i) v[i] = complex_normal(variance);
        return v;
    }

    /// Uniform sample from the complex ball {u : ||u|| <= radius}.
    CVec ball(int n, double radius) {
        CVec v = complex_normal_vector(n, 1.0);
        const double r = radius * std::pow(uniform(), 1.0 / (2.0 * n));
        return v * (r / v.norm());
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace iscsc
