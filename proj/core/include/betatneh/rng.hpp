#pragma once

#include <cstdint>
#include <random>

namespace betatneh {

/// splitmix64 step; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 with a platform-stable uniform mapping (the standard
/// distributions vary across library implementations; this one does not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1): 53 random mantissa bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace betatneh
