#pragma once

/// Deterministic randomness.  Seeds for independent streams are derived by
/// chaining splitmix64 over (master seed, split tag, level, sample index) so
/// sample i is identical no matter what order or thread generates it.
/// Draw transforms are hand-rolled on top of std::mt19937_64 because the
/// standard distributions are implementation-defined and would break the
/// byte-identical reproducibility contract.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mlft {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Collapse a tuple of integers into one well-mixed 64-bit seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x8c9f2a71d95b3e04ULL;
    std::uint64_t out = 0;
    for (std::uint64_t p : parts) {
        state ^= p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
        out = splitmix64_next(state);
    }
    return out;
}

// Split tags for seed derivation; fixed numeric codes are part of the
// reproducibility contract.
enum class Split : std::uint64_t { train = 1, validation = 2, test = 3 };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        default: return "test";
    }
}

/// Deterministic generator: mt19937_64 engine (standardized sequence) with
/// fixed uniform/normal transforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0,1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one draw per pair, second discarded.
    double normal() {
        const double pi = 3.14159265358979323846;
        double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    std::uint64_t next_u64() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace mlft
