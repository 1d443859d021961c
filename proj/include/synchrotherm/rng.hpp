// rng.hpp — counter-based RNG (Threefry2x64, 20 rounds). A keyed stream maps
// a counter directly to random output, so parallel consumers can never
// perturb one another's draws.

#pragma once

#include <array>
#include <cstdint>

namespace synchrotherm::rng {

namespace detail {

constexpr std::uint64_t rotl(std::uint64_t x, int r) {
    return (x << r) | (x >> (64 - r));
}

}  // namespace detail

// One Threefry2x64-20 block: 128 bits of counter, 128 bits of key.
constexpr std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> ctr,
                                                    std::array<std::uint64_t, 2> key) {
    constexpr int kRotations[8] = {16, 42, 12, 31, 16, 32, 24, 21};
    constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;

    const std::uint64_t ks[3] = {key[0], key[1], kParity ^ key[0] ^ key[1]};
    std::uint64_t x0 = ctr[0] + ks[0];
    std::uint64_t x1 = ctr[1] + ks[1];
    for (int round = 0; round < 20; ++round) {
        x0 += x1;
        x1 = detail::rotl(x1, kRotations[round % 8]);
        x1 ^= x0;
        if ((round + 1) % 4 == 0) {
            const int s = (round + 1) / 4;
            x0 += ks[s % 3];
            x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
        }
    }
    return {x0, x1};
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Deterministic stream keyed by (seed, stream). Draw i is a pure function of
// (seed, stream, i), independent of call order.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    double uniform_at(std::uint64_t index) const {
        const auto block = threefry2x64({index >> 1, 0}, key_);
        return to_unit_interval(block[index & 1]);
    }

    double uniform_at(std::uint64_t index, double lo, double hi) const {
        return lo + (hi - lo) * uniform_at(index);
    }

private:
    std::array<std::uint64_t, 2> key_;
};

}  // namespace synchrotherm::rng
