#pragma once

#include <cstdint>
#include <cstddef>

namespace ahd {

// ----------------------------------------------------------------------------
// Seedable, portable random streams.
//
// The generator is xoshiro256** seeded through SplitMix64 (the reference
// initialization). All draws go through integer arithmetic and exact IEEE
// double construction, so a given (seed, stream) pair produces the same bytes
// on every platform. Streams are split by hashing the parent seed with a list
// of stream components; instance k of a dataset is drawn from
// split(seed, domain_tag, role_tag, k) and is reproducible without generating
// instances 0..k-1.
// ----------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive mix of stream components into one 64-bit sub-seed.
inline std::uint64_t mix_seed(std::uint64_t seed) { return seed; }

template <class... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t head, Rest... rest) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + head);
    std::uint64_t mixed = splitmix64(s);
    return mix_seed(mixed, static_cast<std::uint64_t>(rest)...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    /// Child stream derived from this stream's seed and the given components.
    template <class... Parts>
    static Rng split(std::uint64_t seed, Parts... parts) {
        return Rng(mix_seed(seed, static_cast<std::uint64_t>(parts)...));
    }

    std::uint64_t next_u64() {
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

    /// Uniform double in [0, 1) with 53 random bits; exact on every platform.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive (Lemire multiply-shift, unbiased).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return next_u64();  // full 64-bit range
        const std::uint64_t threshold = (0 - span) % span;  // 2^64 mod span
        while (true) {
            std::uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * span;
            if (static_cast<std::uint64_t>(m) < threshold) continue;
            return lo + static_cast<std::uint64_t>(m >> 64);
        }
    }

    /// Index in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::uint64_t>(n) - 1));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace ahd
