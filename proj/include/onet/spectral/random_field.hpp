#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

#include "onet/math/rng.hpp"
#include "onet/spectral/fourier_field.hpp"
#include "onet/spectral/sobolev.hpp"

namespace onet::spectral {

// Mode standard deviation for the Gaussian ensemble at smoothness s:
// sigma_k = (1 + 4 pi^2 |k|^2)^{-(s + dim/2 + 0.5) / 2}, the extra 0.5 keeping
// the H^s norm finite in the band limit.
[[nodiscard]] inline double ensemble_sigma(const std::vector<int>& k, double s, int dim) {
    return std::sqrt(sobolev_weight(k, -(s + 0.5 * dim + 0.5)));
}

[[nodiscard]] inline double ensemble_expected_sq_norm(int dim, double s, int max_mode) {
    FourierField shape(dim, max_mode);
    double acc = 0.0;
    shape.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        const double sig = ensemble_sigma(k, s, dim);
        acc += sobolev_weight(k, s) * sig * sig;
    });
    return acc;
}

// Gaussian random field with independent complex modes on a lexicographic
// half band, mirrored for conjugate symmetry, then rescaled onto the ball
// ||f||_{H^s} <= clip_bound when it lands outside.
[[nodiscard]] inline FourierField sample_random_field(std::uint64_t seed, int dim, double s, int max_mode,
                                                      double clip_bound) {
    if (clip_bound <= 0.0) throw std::invalid_argument("sample_random_field: clip bound must be positive");
    math::GaussianStream gs(seed);
    FourierField f(dim, max_mode);
    f.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        const bool origin = [&] {
            for (int v : k)
                if (v != 0) return false;
            return true;
        }();
        if (origin) {
            f.set_coeff(k, {ensemble_sigma(k, s, dim) * gs.next(), 0.0});
            return;
        }
        if (!lex_positive(k)) return;
        const double sig = ensemble_sigma(k, s, dim) / std::sqrt(2.0);
        const std::complex<double> a{sig * gs.next(), sig * gs.next()};
        f.set_coeff(k, a);
        std::vector<int> neg(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
        f.set_coeff(neg, std::conj(a));
    });
    const double norm = sobolev_norm(f, s);
    if (norm > clip_bound) {
        const double scale = clip_bound / norm;
        for (auto& c : f.raw()) c *= scale;
    }
    return f;
}

// Deterministic-magnitude field |f^_k| = (1 + |k|_2)^{-(decay_s + dim/2 + 0.5)}
// with seeded phases; the workhorse input for reconstruction rate studies.
[[nodiscard]] inline FourierField synthetic_decay_field(std::uint64_t seed, int dim, double decay_s,
                                                        int max_mode) {
    std::mt19937_64 rng(seed);
    FourierField f(dim, max_mode);
    const double expo = decay_s + 0.5 * dim + 0.5;
    f.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        const bool origin = [&] {
            for (int v : k)
                if (v != 0) return false;
            return true;
        }();
        if (origin) {
            f.set_coeff(k, {1.0, 0.0});
            return;
        }
        if (!lex_positive(k)) return;
        double ksq = 0.0;
        for (int v : k) ksq += static_cast<double>(v) * v;
        const double mag = std::pow(1.0 + std::sqrt(ksq), -expo);
        const double phase = two_pi * math::uniform_unit(rng);
        const std::complex<double> a{mag * std::cos(phase), mag * std::sin(phase)};
        f.set_coeff(k, a);
        std::vector<int> neg(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
        f.set_coeff(neg, std::conj(a));
    });
    return f;
}

}  // namespace onet::spectral
