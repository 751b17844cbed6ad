#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "onet/math/multi_index.hpp"
#include "onet/spectral/fourier_field.hpp"

namespace onet::spectral {

// Fourier weight (1 + 4 pi^2 |k|^2)^s used throughout for H^s norms.
[[nodiscard]] inline double sobolev_weight(const std::vector<int>& k, double s) {
    double ksq = 0.0;
    for (int v : k) ksq += static_cast<double>(v) * v;
    return std::pow(1.0 + two_pi * two_pi * ksq, s);
}

[[nodiscard]] inline double sobolev_norm(const FourierField& f, double s) {
    double acc = 0.0;
    f.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        acc += sobolev_weight(k, s) * std::norm(f.raw()[idx]);
    });
    return std::sqrt(acc);
}

// Lower estimate of the W^{n,inf} norm: max |D^alpha f| over |alpha| <= n,
// maximized on a tensor grid with grid_res points per axis. The grid must at
// least resolve the band.
[[nodiscard]] inline double wninf_norm_estimate(const FourierField& f, int n, int grid_res) {
    if (n < 0) throw std::invalid_argument("wninf_norm_estimate: negative order");
    if (grid_res < 2 * f.max_mode() + 1)
        throw std::invalid_argument("wninf_norm_estimate: grid_res below band resolution");
    const auto alphas = math::multi_indices_up_to(f.dim(), n);
    double best = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(f.dim()), 0);
    std::vector<double> x(static_cast<std::size_t>(f.dim()), 0.0);
    while (true) {
        for (int j = 0; j < f.dim(); ++j)
            x[static_cast<std::size_t>(j)] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / grid_res;
        for (const math::MultiIndex& alpha : alphas) {
            const double v = std::abs(f.evaluate_deriv(x, alpha));
            if (v > best) best = v;
        }
        int axis = f.dim() - 1;
        while (axis >= 0) {
            if (++idx[static_cast<std::size_t>(axis)] < grid_res) break;
            idx[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    return best;
}

// || c |k|^{s'} ||-style aggregate over the band: sqrt(sum_{|k|_inf <= N}
// |k|_2^{2 s'} / (2N+1)^dim). Controls how fast grid perturbations can move
// H^{s'} content through the interpolation.
[[nodiscard]] inline double lipschitz_const_P(int enc_n, int dim, double s_prime) {
    if (enc_n < 0) throw std::invalid_argument("lipschitz_const_P: negative band");
    if (dim < 1) throw std::invalid_argument("lipschitz_const_P: dim must be positive");
    FourierField shape(dim, enc_n);
    double acc = 0.0;
    shape.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        double ksq = 0.0;
        for (int v : k) ksq += static_cast<double>(v) * v;
        acc += std::pow(ksq, s_prime);
    });
    return std::sqrt(acc / static_cast<double>(shape.num_modes()));
}

}  // namespace onet::spectral
