#pragma once

#include <cstdint>
#include <vector>

#include "dcq/distribution.hpp"
#include "dcq/error.hpp"

namespace dcq {

/// SplitMix64 finalizer (Steele, Lea and Flood). Used both as the
/// counter-based uniform generator and as the replicate seed mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// The i-th uniform variate of stream `seed`: the top 53 bits of
/// mix64(seed ^ mix64(i)), shifted by half an ulp so the value lies in the
/// open interval (0, 1). Depends only on (seed, i).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t index) noexcept
{
    std::uint64_t bits = mix64(seed ^ mix64(index));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Seed of replicate r derived from a base seed.
constexpr std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) noexcept
{
    return seed ^ mix64(replicate + 0x5851f42d4c957f2dULL);
}

/// `count` draws from d via the inverse-CDF transform of counter_uniform.
inline std::vector<double> mc_sample_stream(const Distribution& d, std::size_t count, std::uint64_t seed)
{
    if (count == 0) throw InvalidArgument("mc_sample_stream: count must be positive");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = d.sample(counter_uniform(seed, i));
    return out;
}

} // namespace dcq
