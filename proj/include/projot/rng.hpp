#pragma once

// SplitMix64 in counter form: the k-th output of a stream keyed by `seed` is
// mix(seed + (k + 1) * golden_gamma). Child streams are keyed by mixing the
// parent key with a stream id, so any (seed, path of ids, k) names one value.
// Uniform and normal variates are derived here rather than through <random>
// distributions, whose algorithms differ between standard libraries.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace projot {

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : key_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Value at an explicit counter position; does not advance the stream.
    constexpr std::uint64_t at(std::uint64_t counter) const noexcept
    {
        return mix(key_ + (counter + 1) * golden_gamma);
    }

    constexpr std::uint64_t next() noexcept { return at(counter_++); }
    constexpr std::uint64_t operator()() noexcept { return next(); }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return std::numeric_limits<std::uint64_t>::max(); }

    /// Independent child stream; the parent is not advanced.
    constexpr SplitMix64 split(std::uint64_t stream_id) const noexcept
    {
        return SplitMix64(mix(key_ ^ mix(stream_id + golden_gamma)));
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t position() const noexcept { return counter_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_low() noexcept { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal by Box-Muller; consumes exactly two words per call.
    double normal() noexcept
    {
        const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t x = next();
        while (x >= limit)
            x = next();
        return x % bound;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace projot
