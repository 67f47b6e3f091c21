#pragma once

#include <cstdint>
#include <random>

namespace mixplan {

// Deterministic RNG used everywhere randomness is needed. All simulation
// results must be bit-reproducible from a seed, so nothing in the library may
// touch std::random_device or unseeded engines.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derives an independent stream, e.g. one per trial. splitmix64-style
    // mixing keeps derived seeds decorrelated even for consecutive ids.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace mixplan
