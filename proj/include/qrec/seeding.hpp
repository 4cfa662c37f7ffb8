#pragma once

#include <cstdint>
#include <random>

namespace qrec {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed of trial `index` under `master`.  Fixed forever: changing it changes every output.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index));
}

// mt19937_64 with portable conversions (the std distributions are not
// specified bit-for-bit across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    // Uniform on (0, 1).
    double uniform_open() {
        double u;
        do u = uniform();
        while (u == 0.0);
        return u;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace qrec
