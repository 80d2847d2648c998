#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace relibat {

/// SplitMix64 output function (Steele, Lea, Flood 2014). Bijective 64-bit mixer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Derives the seed of an independent sub-stream from a parent seed and a stream index
 * (trial block, stratum, run, ...). Pure function, so any worker can reconstruct any
 * stream without coordination.
 */
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    return splitmix64_mix(splitmix64_mix(seed) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/**
 * xoshiro256** 1.0 (Blackman, Vigna). State is filled from the seed by a SplitMix64
 * sequence. Satisfies UniformRandomBitGenerator.
 */
class Xoshiro256
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept
    {
        std::uint64_t x = seed;
        for (auto& word : state_)
        {
            x += 0x9E3779B97F4A7C15ULL;
            word = splitmix64_mix(x);
        }
    }

    /// Generator for sub-stream `index` of `seed`.
    static constexpr Xoshiro256 stream(std::uint64_t seed, std::uint64_t index) noexcept
    {
        return Xoshiro256(derive_seed(seed, index));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double on [0, 1): the top 53 bits scaled by 2^-53.
    constexpr double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace relibat
