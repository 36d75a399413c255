#pragma once

#include <cstdint>
#include <random>

namespace cra {

/// Finalizer-style 64-bit mixer; decorrelates consecutive counters.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for the index-th independent stream of a master seed. Same scheme
/// everywhere (runs, sweep points) so results never depend on thread layout.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + 0x9E3779B97F4A7C15ull * (index + 1));
}

/// Deterministic uniform generator. Doubles are built from the top 53 bits of
/// the engine output rather than std::uniform_real_distribution, whose mapping
/// the standard leaves implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace cra
