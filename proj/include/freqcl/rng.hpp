#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace freqcl {

inline constexpr double kPi = 3.14159265358979323846;

// Seeded generator with hand-rolled draws. std::mt19937_64 output is fully
// specified by the standard, and deriving uniforms/normals from raw bits
// keeps sequences independent of the library's distribution implementations,
// which are allowed to differ between toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // inclusive bounds; span must fit in uint64
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

  private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed plus context words.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                              std::uint64_t d = 0) {
    std::uint64_t state = a;
    std::uint64_t h = splitmix64(state);
    state ^= b;
    h ^= splitmix64(state);
    state ^= c;
    h ^= splitmix64(state);
    state ^= d;
    h ^= splitmix64(state);
    return h;
}

}  // namespace freqcl
