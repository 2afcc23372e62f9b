#pragma once

#include <cstdint>

namespace ratiorules {

/// SplitMix64 output function.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

/// Counter-based generator: the value at (seed, stream, counter) is
///
///   key   = mix(seed + G * (stream + 1))
///   value = mix(key  + G * (counter + 1))
///
/// with mix the SplitMix64 finalizer and G = 0x9e3779b97f4a7c15. Streams are
/// independent, so records can be generated in any order.
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64_mix(seed + kGamma * (stream + 1))) {}

    constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
        return splitmix64_mix(key_ + kGamma * (counter + 1));
    }

    constexpr std::uint64_t next() noexcept { return at(counter_++); }

    /// Uniform in [0, 1) from the top 53 bits.
    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n >= 1, by multiply-shift.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        return mul_high(next(), n);
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t mul_high(std::uint64_t a, std::uint64_t b) noexcept {
        const std::uint64_t a_lo = a & 0xffffffffu, a_hi = a >> 32;
        const std::uint64_t b_lo = b & 0xffffffffu, b_hi = b >> 32;
        const std::uint64_t lo_lo = a_lo * b_lo;
        const std::uint64_t hi_lo = a_hi * b_lo;
        const std::uint64_t lo_hi = a_lo * b_hi;
        const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffu) + lo_hi;
        return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ratiorules
