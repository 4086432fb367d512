#pragma once

#include <cstdint>
#include <random>

namespace pams {

/// splitmix64 step; used only to spread seeds into well-mixed engine states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seedable generator with bit-exact cross-platform output.
///
/// Wraps std::mt19937_64 (whose sequence the standard fully specifies) and
/// derives variates without std::*_distribution, which are implementation
/// defined. Substreams are keyed by index so that stream k never changes
/// when more streams are added later.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        engine_.seed(splitmix64(s));
    }

    static Rng substream(std::uint64_t base_seed, std::uint64_t index) {
        std::uint64_t s = base_seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (0xD1B54A32D192ED03ULL * (index + 1));
        return Rng(splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, n), rejection-sampled to remove modulo bias.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t rem = (0ULL - n) % n; // 2^64 mod n
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= rem) return (x - rem) % n;
        }
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace pams
