#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/spectral/fourier_field.hpp"

namespace onet::spectral {

// Point values on the uniform periodic grid x_nu = nu / (2 enc_n + 1),
// nu in {0, ..., 2 enc_n}^dim, row-major.
struct GridSample {
    int dim = 1;
    int enc_n = 0;
    std::vector<double> values;

    GridSample() = default;
    GridSample(int d, int n) : dim(d), enc_n(n) {
        if (d < 1) throw std::invalid_argument("GridSample: dim must be positive");
        if (n < 0) throw std::invalid_argument("GridSample: negative encoder order");
        values.assign(num_points(d, n), 0.0);
    }

    [[nodiscard]] int points_per_axis() const { return 2 * enc_n + 1; }

    [[nodiscard]] static std::size_t num_points(int d, int n) {
        std::size_t m = 1;
        for (int j = 0; j < d; ++j) m *= static_cast<std::size_t>(2 * n + 1);
        return m;
    }

    // Row-major walk over grid multi-indices; fn(nu, flat_idx, x) with x the grid point.
    template <typename F>
    void for_each_node(F&& fn) const {
        const int ppa = points_per_axis();
        std::vector<int> nu(static_cast<std::size_t>(dim), 0);
        std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
        std::size_t idx = 0;
        while (true) {
            for (int j = 0; j < dim; ++j)
                x[static_cast<std::size_t>(j)] = static_cast<double>(nu[static_cast<std::size_t>(j)]) / ppa;
            fn(static_cast<const std::vector<int>&>(nu), idx, static_cast<const std::vector<double>&>(x));
            ++idx;
            int axis = dim - 1;
            while (axis >= 0) {
                if (++nu[static_cast<std::size_t>(axis)] < ppa) break;
                nu[static_cast<std::size_t>(axis)] = 0;
                --axis;
            }
            if (axis < 0) return;
        }
    }
};

// Encoder D: sample the field at the (2N+1)^dim uniform grid nodes.
[[nodiscard]] inline GridSample encode_D(const FourierField& f, int enc_n) {
    GridSample g(f.dim(), enc_n);
    g.for_each_node([&](const std::vector<int>&, std::size_t idx, const std::vector<double>& x) {
        g.values[idx] = f.evaluate(x);
    });
    return g;
}

}  // namespace onet::spectral
