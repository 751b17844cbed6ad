#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "onet/math/multi_index.hpp"
#include "onet/math/rng.hpp"
#include "onet/pde/truth_operator.hpp"
#include "onet/spectral/grid_sample.hpp"
#include "onet/spectral/pseudo_spectral.hpp"
#include "onet/trunk/basis.hpp"
#include "onet/trunk/local_poly.hpp"

namespace onet::pde {

// The composite functional probed below: grid values -> reconstructed field ->
// solution of the truth problem -> one least-squares trunk coefficient. The
// basis index walks (alpha, cover cell) pairs alpha-major, matching TrunkBasis.
[[nodiscard]] inline double trunk_coeff_of_solution(const OperatorSpec& op,
                                                    const spectral::GridSample& z, std::size_t k_index,
                                                    int K, int n, int quad_res) {
    const auto alphas = math::multi_indices_up_to(z.dim, n - 1);
    const auto boxes = trunk::enumerate_boxes(K, z.dim);
    if (k_index >= alphas.size() * boxes.size())
        throw std::out_of_range("trunk_coeff_of_solution: basis index out of range");
    const std::size_t alpha_idx = k_index / boxes.size();
    const std::size_t box_idx = k_index % boxes.size();
    const spectral::FourierField u = solve_truth(op, spectral::reconstruct_P(z));
    const trunk::LocalPoly poly = trunk::local_poly_coeffs_ls(u, boxes[box_idx], K, n, quad_res);
    return poly.coeffs[alpha_idx];
}

// Max observed ratio |c_k(u(z1)) - c_k(u(z2))| / |z1 - z2| over random Gaussian
// grid-value pairs; coincident pairs are skipped.
[[nodiscard]] inline double lipschitz_probe(const OperatorSpec& op, std::size_t k_index, int N,
                                            int n_pairs, std::uint64_t seed, int dim = 1, int K = 2,
                                            int n = 3, int quad_res = 8) {
    if (n_pairs < 1) throw std::invalid_argument("lipschitz_probe: need at least one pair");
    math::GaussianStream gs(seed);
    spectral::GridSample z1(dim, N), z2(dim, N);
    double worst = 0.0;
    for (int trial = 0; trial < n_pairs; ++trial) {
        for (double& v : z1.values) v = gs.next();
        for (double& v : z2.values) v = gs.next();
        double dist2 = 0.0;
        for (std::size_t i = 0; i < z1.values.size(); ++i) {
            const double d = z1.values[i] - z2.values[i];
            dist2 += d * d;
        }
        if (dist2 == 0.0) continue;
        const double c1 = trunk_coeff_of_solution(op, z1, k_index, K, n, quad_res);
        const double c2 = trunk_coeff_of_solution(op, z2, k_index, K, n, quad_res);
        worst = std::max(worst, std::abs(c1 - c2) / std::sqrt(dist2));
    }
    return worst;
}

// Exact norm of the same functional by unit-vector enumeration; the linear map
// z -> c_k makes this the sharp bound every probed ratio must respect.
[[nodiscard]] inline double lipschitz_probe_oracle(const OperatorSpec& op, std::size_t k_index, int N,
                                                   int dim = 1, int K = 2, int n = 3,
                                                   int quad_res = 8) {
    spectral::GridSample e(dim, N);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        e.values.assign(e.values.size(), 0.0);
        e.values[i] = 1.0;
        const double wi = trunk_coeff_of_solution(op, e, k_index, K, n, quad_res);
        norm2 += wi * wi;
    }
    return std::sqrt(norm2);
}

}  // namespace onet::pde
