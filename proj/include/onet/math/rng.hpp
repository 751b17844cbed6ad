#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace onet::math {

// Deterministic draws on top of mt19937_64. std::uniform_real_distribution and
// std::normal_distribution are implementation-defined, so the mappings from raw
// bits to doubles live here and nowhere else.

[[nodiscard]] inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

[[nodiscard]] inline double uniform_sym(std::mt19937_64& rng, double half_width) {
    return (2.0 * uniform_unit(rng) - 1.0) * half_width;
}

struct GaussianPair {
    double first;
    double second;
};

// Box-Muller transform; consumes exactly two raw draws.
[[nodiscard]] inline GaussianPair gaussian_pair(std::mt19937_64& rng) {
    double u1 = uniform_unit(rng);
    double u2 = uniform_unit(rng);
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1) so 1-u1 in (0,1]
    double a = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

// Caches the second Box-Muller value so single draws stay cheap and ordered.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    [[nodiscard]] double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        GaussianPair p = gaussian_pair(rng_);
        spare_ = p.second;
        has_spare_ = true;
        return p.first;
    }

    [[nodiscard]] std::mt19937_64& raw() { return rng_; }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace onet::math
