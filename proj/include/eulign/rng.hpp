#pragma once

#include <cmath>
#include <cstdint>

namespace eulign {

/// Counter-based generator (splitmix64 over a keyed counter). Every draw
/// is a pure function of (seed, stream, counter), so sampling is
/// reproducible independently of thread count or call interleaving.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = seed_ ^ (stream_ * 0x9e3779b97f4a7c15ULL) ^
                          (counter * 0xbf58476d1ce4e5b9ULL);
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform(std::uint64_t counter) const {
        return double(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on two derived uniforms.
    double normal(std::uint64_t counter) const {
        const double u1 = double((bits(2 * counter) >> 11) + 1) * 0x1.0p-53; // avoid log(0)
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace eulign
