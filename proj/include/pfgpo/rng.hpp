// Seeded random source. Every stochastic routine in the library takes one of
// these explicitly; no global generator exists.
#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace pfgpo {

/// SplitMix64 finalizer; used to decorrelate consecutive integer seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent sub-stream `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// +1 or -1 with equal probability.
    double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    // ziggurat sampler; much cheaper than std::normal_distribution's polar method
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pfgpo
