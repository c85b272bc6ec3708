#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lrfs {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// Derives an independent stream key from a seed and a tuple of integers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t key = splitmix64(seed);
    for (const auto part : parts) {
        key = splitmix64(key ^ splitmix64(part + 0x632BE59BD9B4E019ULL));
    }
    return key;
}

/// Counter-based generator: output n is a bijective mix of (key, n).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0) noexcept : key_(splitmix64(key)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11U) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace lrfs
