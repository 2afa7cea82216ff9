#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace embstab::rng {

// All randomness in this project flows through xoshiro256++ (Blackman &
// Vigna, public domain) seeded via splitmix64. Both are fully specified
// integer algorithms, so identical seeds give identical draws on every
// platform and compiler. Each consumer derives its own stream from a
// (seed, purpose, key1, key2) tuple instead of sharing a generator, which
// keeps results independent of evaluation order and thread scheduling.

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stream purposes. The numeric values are part of the determinism contract:
// changing them changes every derived stream.
enum class Purpose : std::uint64_t {
    GraphGen = 1,   // random-graph generators
    Walks = 2,      // biased random walks
    Init = 3,       // embedding initialization
    Negatives = 4,  // negative sampling
    Shuffle = 5,    // walk-order shuffling during training
    Tests = 6,      // test-only data generation
};

// FNV-1a, used to fold strings (parameter-set labels, model names) into
// stream keys.
inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Stream {
  public:
    // Derivation rule: chain splitmix64 over seed, purpose and the two
    // optional keys, then take four successive outputs as the xoshiro
    // state. Documented so other implementations can reproduce it.
    Stream(std::uint64_t seed, Purpose purpose, std::uint64_t key1 = 0,
           std::uint64_t key2 = 0) {
        std::uint64_t sm = seed;
        splitmix64(sm);
        sm ^= static_cast<std::uint64_t>(purpose) * 0x9e3779b97f4a7c15ull;
        splitmix64(sm);
        sm ^= key1;
        splitmix64(sm);
        sm ^= key2;
        state_[0] = splitmix64(sm);
        state_[1] = splitmix64(sm);
        state_[2] = splitmix64(sm);
        state_[3] = splitmix64(sm);
    }

    // xoshiro256++ next().
    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) via Lemire's multiply-shift rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller on two explicit uniforms. Avoids
    // std::normal_distribution, whose algorithm is implementation-defined.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable per-cell seed for experiment runs: mixes the experiment seed, the
// canonical parameter-set label and the repeat index. Pure integer math,
// identical on every platform.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::string_view label,
                                           std::uint64_t repeat) {
    std::uint64_t sm = base ^ fnv1a64(label);
    splitmix64(sm);
    sm ^= repeat;
    return splitmix64(sm);
}

}  // namespace embstab::rng
