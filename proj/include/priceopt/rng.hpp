#pragma once

// Seeded, stream-splittable RNG for reproducible simulation and sampling.
// xoshiro256++ core with splitmix64 stream derivation; all distribution
// code is self-contained so results are bit-identical across standard
// library implementations.

#include <cstdint>
#include <cmath>
#include <numbers>

namespace priceopt {

// Stream tags keeping the RNG consumers of one master seed independent.
enum StreamTag : std::uint64_t {
    kStreamCustomer = 1,
    kStreamHistory = 2,
    kStreamConjoint = 3,
    kStreamGroundTruth = 4,
    kStreamDecisionPool = 5,
    kStreamDecisionDraw = 6,
    kStreamChain = 7,
};

// splitmix64 finalizer; used to mix seeds and stream tags into states.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    // Streams are identified by (seed, stream, substream); distinct tuples
    // give statistically independent sequences.
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0,
                       std::uint64_t substream = 0) {
        std::uint64_t h = mix64(seed);
        h = mix64(h ^ mix64(stream ^ 0x6A09E667F3BCC909ULL));
        h = mix64(h ^ mix64(substream ^ 0xBB67AE8584CAA73BULL));
        for (auto& word : state_) {
            h = mix64(h);
            word = h;
        }
        state_[0] |= 1;  // rule out the all-zero state
    }

    std::uint64_t next() {
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

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1].
    double uniform_pos() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Standard normal via Box-Muller; consumes exactly two words per call.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x < threshold);
        return x % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace priceopt
