#pragma once

#include <cmath>
#include <cstdint>

namespace bvib {

// Deterministic PRNG used everywhere in the simulator. splitmix64 core:
// identical sequences on every platform, trivially seedable, and cheap to
// fork into independent substreams. Distributions (uniform, gaussian,
// bounded int) are implemented here rather than with <random> so that the
// draws themselves are platform-stable.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Draws two uniforms per call; no spare
    // is cached so the draw count per call is fixed.
    double next_gaussian() {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n) without modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~0ull - ~0ull % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

// Every random decision in a run draws from a named substream so that
// changing one consumer (say, the attacker) never perturbs another (say,
// weight init). Streams are derived from (master seed, purpose, index).
enum class StreamPurpose : std::uint32_t {
    device_init = 1,
    server_init = 2,
    reparam_eps = 3,
    shuffle = 4,
    election = 5,
    attack = 6,
    synthetic_data = 7,
    shard = 8,
};

inline RngStream derive_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index = 0) {
    // splitmix-style mixing of the three components into one seed
    std::uint64_t s = master_seed;
    s ^= (static_cast<std::uint64_t>(purpose) << 32 | index) + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
    RngStream warmup(s);
    return RngStream(warmup.next_u64());
}

} // namespace bvib
