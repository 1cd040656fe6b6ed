// rng.hpp
//
// Counter-based random streams: every draw is a pure function of
// (seed, replication, stratum, subject), so results do not depend on the order
// or the thread in which replications are evaluated.
#pragma once

#include <cstdint>
#include <limits>

namespace epsopt {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Key of the substream owned by one stratum in one replication.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replication,
                                          std::uint64_t stratum) {
    std::uint64_t k = mix64(seed + kGoldenGamma);
    k = mix64(k ^ (replication + 1) * kGoldenGamma);
    return mix64(k ^ (stratum + 1) * 0xd1b54a32d192ed03ULL);
}

/// Uniform [0, 1) variate for one subject of a substream.
inline constexpr double subject_uniform(std::uint64_t key, std::uint64_t subject) {
    return static_cast<double>(mix64(key + (subject + 1) * kGoldenGamma) >> 11) * 0x1.0p-53;
}

/// SplitMix64 as a UniformRandomBitGenerator, for distributions that need a
/// variable number of raw draws (e.g. gamma rejection sampling).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

}  // namespace epsopt
