#pragma once

#include <gsl/gsl_integration.h>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace onet::math {

// Gauss-Legendre nodes and weights on [a, b], backed by GSL's glfixed tables.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] inline GaussLegendre gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)> table(
        gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)),
        gsl_integration_glfixed_table_free);
    if (!table) throw std::runtime_error("gauss_legendre: table allocation failed");
    GaussLegendre q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &q.nodes[static_cast<std::size_t>(i)],
                                      &q.weights[static_cast<std::size_t>(i)], table.get());
    }
    return q;
}

// Midpoint nodes (i + 1/2) / n on [0, 1), common weight 1/n.
[[nodiscard]] inline std::vector<double> midpoint_nodes(int n) {
    if (n < 1) throw std::invalid_argument("midpoint_nodes: need at least one node");
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (i + 0.5) / n;
    return x;
}

// Walks the tensor grid {0, ..., n-1}^dim in row-major order.
template <typename F>
void for_each_tensor_index(int dim, int n, F&& fn) {
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        fn(static_cast<const std::vector<int>&>(idx));
        int axis = dim - 1;
        while (axis >= 0) {
            if (++idx[static_cast<std::size_t>(axis)] < n) break;
            idx[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) return;
    }
}

}  // namespace onet::math
