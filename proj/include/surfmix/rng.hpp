#ifndef SURFMIX_RNG_HPP
#define SURFMIX_RNG_HPP

#include <cstdint>

namespace surfmix {

/// Counter-based generator: the counter-th output of a SplitMix64 stream
/// whose state starts at key. Stateless, so any (key, counter) pair can be
/// evaluated in O(1) and replicas never share mutable state.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter)
{
    std::uint64_t z = key + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of replica `index` under a master seed.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index)
{
    return counter_hash(master ^ 0x5851F42D4C957F2Dull, index);
}

/// Uniform integer in [0, bound) from the high bits of w (multiply-shift).
constexpr int bounded(std::uint64_t w, int bound)
{
    return static_cast<int>((static_cast<unsigned __int128>(w >> 1) * static_cast<unsigned>(bound)) >> 63);
}

/// Uniform double in the open interval (0, 1).
constexpr double open_unit(std::uint64_t w)
{
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace surfmix

#endif
