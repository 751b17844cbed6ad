#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/spectral/fourier_field.hpp"
#include "onet/spectral/grid_sample.hpp"

namespace onet::spectral {

// Discrete inner product (f, g)_N = (1 / (2N+1)^dim) sum_nu f_nu conj(g_nu).
[[nodiscard]] inline std::complex<double> discrete_inner(const std::vector<std::complex<double>>& f,
                                                         const std::vector<std::complex<double>>& g) {
    if (f.size() != g.size()) throw std::invalid_argument("discrete_inner: size mismatch");
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
    return acc / static_cast<double>(f.size());
}

[[nodiscard]] inline double discrete_inner(const GridSample& f, const GridSample& g) {
    if (f.dim != g.dim || f.enc_n != g.enc_n) throw std::invalid_argument("discrete_inner: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) acc += f.values[i] * g.values[i];
    return acc / static_cast<double>(f.values.size());
}

// phi_k sampled on the (2N+1)^dim grid.
[[nodiscard]] inline std::vector<std::complex<double>> sample_mode(const std::vector<int>& k, int enc_n) {
    const int dim = static_cast<int>(k.size());
    GridSample shape(dim, enc_n);
    std::vector<std::complex<double>> out(shape.values.size());
    shape.for_each_node([&](const std::vector<int>&, std::size_t idx, const std::vector<double>& x) {
        double phase = 0.0;
        for (int j = 0; j < dim; ++j) phase += k[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        phase *= two_pi;
        out[idx] = {std::cos(phase), std::sin(phase)};
    });
    return out;
}

// Pseudo-spectral projection P: trigonometric interpolation of the grid data,
// (P g)^_k = (1/m) sum_nu g_nu exp(-i 2 pi k . nu / (2N+1)) for |k|_inf <= N.
// Coefficients for -k are filled by conjugation so the result is exactly
// conjugate symmetric for real input.
[[nodiscard]] inline FourierField reconstruct_P(const GridSample& g) {
    FourierField out(g.dim, g.enc_n);
    const double inv_m = 1.0 / static_cast<double>(g.values.size());
    out.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        if (!lex_positive(k)) {
            bool zero = true;
            for (int v : k)
                if (v != 0) zero = false;
            if (!zero) return;  // filled from the mirror mode below
        }
        std::complex<double> acc{0.0, 0.0};
        g.for_each_node([&](const std::vector<int>&, std::size_t idx, const std::vector<double>& x) {
            double phase = 0.0;
            for (int j = 0; j < g.dim; ++j)
                phase += k[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            phase *= two_pi;
            acc += g.values[idx] * std::complex<double>(std::cos(phase), -std::sin(phase));
        });
        acc *= inv_m;
        out.set_coeff(k, acc);
        std::vector<int> neg(k.size());
        bool zero = true;
        for (std::size_t j = 0; j < k.size(); ++j) {
            neg[j] = -k[j];
            if (k[j] != 0) zero = false;
        }
        if (!zero) out.set_coeff(neg, std::conj(acc));
    });
    return out;
}

}  // namespace onet::spectral
