#pragma once

#include <cstdint>

#include "crt/inference.hpp"

namespace crt {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace detail

// Splittable counter-based stream (splitmix64). Every randomized operation in
// the library takes one of these explicitly; replication r of a study derives
// its own stream from (seed, r), so results do not depend on scheduling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(detail::mix64(seed)) {}

    // Independent stream for a numbered work item under a master seed.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        Rng r(0);
        r.state_ = detail::mix64(detail::mix64(seed) ^ detail::mix64(stream + 0x632be59bd9b4e019ull));
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = -n % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Exact inverse-CDF normal draw.
    double normal(double mean, double sd) {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return mean + sd * normal_quantile(u);
    }

  private:
    std::uint64_t state_;
};

}  // namespace crt
