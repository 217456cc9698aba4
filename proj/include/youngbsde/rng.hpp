#pragma once

// Counter-based random numbers (Philox4x32-10). A draw is a pure function of
// (seed, counter), so output never depends on how work is split across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ybsde {

class KeyedNormal {
public:
    explicit KeyedNormal(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Raw 128-bit block for counter (a, b, c, d).
    std::array<std::uint32_t, 4> block(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                       std::uint32_t d) const noexcept {
        std::array<std::uint32_t, 4> ctr{a, b, c, d};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    /// Uniform in (0, 1).
    double uniform(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const noexcept {
        const auto r = block(a, b, c, d);
        return to_open_unit(r[0], r[1]);
    }

    /// Standard normal via Box-Muller on one counter block.
    double normal(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const noexcept {
        const auto r = block(a, b, c, d);
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
};

/// Stream tags keep generators for different purposes apart under one seed.
enum class Stream : std::uint32_t {
    brownian = 1,
    random_pl = 2,
    fbm = 3,
    sweep = 4,
};

}  // namespace ybsde
