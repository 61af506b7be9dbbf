#pragma once

#include <cstdint>
#include <string_view>

namespace tableforge {

/// splitmix64 step. Used both as a stand-alone mixer and to derive
/// per-record seeds from a master seed. Fixed algorithm, identical output
/// on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for record `index` of a run keyed by `master`. Records are
/// generated independently, so any subset of indices can be regenerated
/// without replaying the stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ (index + 0x632be59bd9b4e019ULL);
    std::uint64_t b = splitmix64(s);
    s = b;
    return splitmix64(s);
}

/// 64-bit hash of a byte string (FNV-1a folded through splitmix64).
/// Used for deterministic re-splits keyed on record ids.
inline std::uint64_t hash_bytes(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

/// Deterministic pseudo-random stream. Thin xoshiro-free wrapper around
/// splitmix64; distributions below avoid std::* distributions so that
/// output bytes do not depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64()); // full range
        // multiply-shift bounded draw; bias is < 2^-64 * span, irrelevant here
        const std::uint64_t x = next_u64();
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * span;
        return lo + static_cast<std::int64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Bernoulli draw.
    bool chance(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

} // namespace tableforge
