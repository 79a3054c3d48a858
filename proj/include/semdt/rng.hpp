#ifndef SEMDT_RNG_HPP
#define SEMDT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace semdt {

using Rng = std::mt19937_64;

// Uniform helpers on top of the raw generator. std::uniform_*_distribution
// output is implementation-defined, which would break bit-reproducible runs
// across standard libraries, so draws are derived from raw 64-bit words.

inline double uniform_unit(Rng& rng) {
    // 53 random mantissa bits -> [0, 1)
    return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // multiply-shift; bias is negligible for n << 2^64 and irrelevant here
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace semdt

#endif
