// random.hpp — deterministic, stream-splittable randomness.
//
// All sampling draws go through RandomSource so that results are reproducible
// across platforms and across worker counts: a (seed, stream) pair names an
// independent generator, and batch runs give each trial its own stream. The
// variate functions are hand-rolled because the std:: distribution objects do
// not produce identical sequences on different standard libraries.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace fetree {

class RandomSource {
public:
    explicit RandomSource(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {
        std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                          static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    RandomSource split(uint64_t stream) const { return RandomSource(seed_, stream); }

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n) without modulo bias.
    uint64_t next_below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below(0)");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Index i with probability weights[i] / sum(weights). Weights need not be
    // normalized; ties from floating error fall to the last positive weight.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (const double w : weights) total += w;
        if (total <= 0.0) throw std::invalid_argument("categorical: no positive weight");
        double u = next_double() * total;
        int last_positive = -1;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = static_cast<int>(i);
            u -= weights[i];
            if (u < 0.0) return last_positive;
        }
        return last_positive;
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace fetree
