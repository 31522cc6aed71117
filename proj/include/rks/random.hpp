#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rks {

// Counter-based generator: the k-th output is a SplitMix64 finalization of
// key + k * golden. Streams are addressed by hashing (seed, ids...) into the
// key, so any substream can be reproduced without replaying its siblings.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr CounterRng substream(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> ids) noexcept
    {
        std::uint64_t key = mix(seed ^ 0x6a09e667f3bcc908ULL);
        for (std::uint64_t id : ids)
            key = mix(key ^ mix(id + 0x3c6ef372fe94f82bULL));
        return CounterRng(key);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    constexpr std::uint64_t key() const noexcept { return key_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
template <class Rng>
double uniform01(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace rks
