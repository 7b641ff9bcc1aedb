#pragma once

#include <cmath>
#include <cstdint>

namespace rbcm {

// Counter-based pseudo-random numbers. Every draw is a pure function of
// (seed, counter), so streams are reproducible bit-for-bit regardless of
// threading or call order.

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

}  // namespace detail

inline std::uint64_t random_bits(std::uint64_t seed, std::uint64_t counter) {
    return detail::splitmix64(seed + (counter + 1) * detail::kGolden);
}

// Derive an independent stream seed from a parent seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::splitmix64(seed ^ detail::splitmix64(tag + detail::kGolden));
}

// Uniform draw in (0, 1].
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>((random_bits(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter-indexed uniforms.
inline double gaussian(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(seed, 2 * counter);
    const double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace rbcm
