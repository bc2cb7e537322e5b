// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace cffd {

/// 64-bit finalizer from SplitMix64; a bijection with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent sub-stream key from a parent seed and up to three indices.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t i = 0,
                                   std::uint64_t j = 0) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (tag * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (i * 0xa0761d6478bd642fULL));
    h = mix64(h ^ (j * 0xe7037ed1a0b428dbULL));
    return h;
}

/// SplitMix64 as a UniformRandomBitGenerator. Cheap to construct, so every
/// link can own its own stream.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Circularly-symmetric complex Gaussian source CN(0, variance).
class ComplexGaussian {
public:
    explicit ComplexGaussian(std::uint64_t key) : engine_(key) {}

    std::complex<double> operator()(double variance) {
        const double sd = std::sqrt(0.5 * variance);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {sd * re, sd * im};
    }

private:
    SplitMix64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cffd
