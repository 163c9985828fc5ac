#pragma once

#include <cstdint>
#include <random>

namespace nczw {

// Splittable deterministic RNG: every (seed, stream) pair yields an
// independent, reproducible generator regardless of evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed, 0x9e3779b97f4a7c15ull)) {}

    static Rng split(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix(seed, mix(stream, 0xbf58476d1ce4e5b9ull)));
    }

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double gaussian(double sigma = 1.0) {
        return std::normal_distribution<double>(0.0, sigma)(engine_);
    }
    std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }
    int sign() { return integer(2) == 0 ? -1 : 1; }

    std::mt19937_64& engine() { return engine_; }

private:
    // SplitMix64 finalizer
    static std::uint64_t mix(std::uint64_t x, std::uint64_t salt) {
        x += salt;
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27; x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::mt19937_64 engine_;
};

}  // namespace nczw
