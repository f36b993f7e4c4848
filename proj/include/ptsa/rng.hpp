#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "ptsa/stats.hpp"

namespace ptsa {

/// Deterministic random stream. Normal variates go through the inverse CDF so
/// that sequences are identical across platforms and standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw strictly inside (0, 1).
    double uniform01() {
        const std::uint64_t r = engine_();
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return stats::norm_ppf(uniform01()); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Mix a base seed with a list of stream tags (run index, level, chain, ...).
/// Streams with distinct tag paths are statistically independent and do not
/// depend on evaluation order, which keeps parallel runs reproducible.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = detail::splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    for (std::uint64_t t : tags) h = detail::splitmix64(h ^ t);
    return h;
}

inline RngStream derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    return RngStream(derive_seed(seed, tags));
}

// Stream-purpose tags used by the estimators.
namespace rng_tag {
inline constexpr std::uint64_t dmc = 0x11;
inline constexpr std::uint64_t subsim_init = 0x22;
inline constexpr std::uint64_t subsim_chain = 0x33;
inline constexpr std::uint64_t run = 0x44;
}  // namespace rng_tag

}  // namespace ptsa
