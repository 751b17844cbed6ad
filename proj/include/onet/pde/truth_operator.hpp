#pragma once

#include <stdexcept>
#include <vector>

#include "onet/spectral/fourier_field.hpp"
#include "onet/spectral/sobolev.hpp"

namespace onet::pde {

// L u = -laplacian(u) + c u on the periodic unit cube. c > 0 keeps the k = 0
// mode invertible.
struct OperatorSpec {
    double c = 1.0;

    void validate() const {
        if (!(c > 0.0)) throw std::invalid_argument("OperatorSpec: zeroth-order coefficient must be positive");
    }
};

// Fourier symbol of L at mode k: 4 pi^2 |k|^2 + c.
[[nodiscard]] inline double symbol(const OperatorSpec& op, const std::vector<int>& k) {
    double ksq = 0.0;
    for (int v : k) ksq += static_cast<double>(v) * v;
    return spectral::two_pi * spectral::two_pi * ksq + op.c;
}

[[nodiscard]] inline spectral::FourierField apply_L_field(const OperatorSpec& op,
                                                          const spectral::FourierField& u) {
    op.validate();
    spectral::FourierField f(u.dim(), u.max_mode());
    u.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        f.raw()[idx] = u.raw()[idx] * symbol(op, k);
    });
    return f;
}

[[nodiscard]] inline spectral::FourierField solve_truth(const OperatorSpec& op,
                                                        const spectral::FourierField& f) {
    op.validate();
    spectral::FourierField u(f.dim(), f.max_mode());
    f.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        u.raw()[idx] = f.raw()[idx] / symbol(op, k);
    });
    return u;
}

// Mode-wise extrema over |k|_inf <= k_max:
//   stability:       sup (1 + 4 pi^2 |k|^2) / (4 pi^2 |k|^2 + c),
//                    the two-orders regularity gain ||u||_{H^{s+2}} / ||f||_{H^s}
//   solve_lipschitz: sup 1 / (4 pi^2 |k|^2 + c), same-order contraction factor.
// Both ratios are independent of the order s, which the s_levels sweep checks.
struct AssumptionConstants {
    double stability = 0.0;
    double solve_lipschitz = 0.0;
};

[[nodiscard]] inline AssumptionConstants check_assumption_constants(const OperatorSpec& op,
                                                                    const std::vector<double>& s_levels,
                                                                    int dim = 1, int k_max = 64) {
    op.validate();
    if (s_levels.empty()) throw std::invalid_argument("check_assumption_constants: no levels given");
    AssumptionConstants out;
    spectral::FourierField shape(dim, k_max);
    shape.for_each_mode([&](const std::vector<int>& k, std::size_t) {
        const double sym = symbol(op, k);
        double ksq = 0.0;
        for (int v : k) ksq += static_cast<double>(v) * v;
        const double num = 1.0 + spectral::two_pi * spectral::two_pi * ksq;
        for (double s : s_levels) {
            const double via_weights =
                spectral::sobolev_weight(k, s + 1.0) / spectral::sobolev_weight(k, s);
            if (std::abs(via_weights - num) > 1e-9 * num)
                throw std::runtime_error("check_assumption_constants: order-dependent ratio");
        }
        out.stability = std::max(out.stability, num / sym);
        out.solve_lipschitz = std::max(out.solve_lipschitz, 1.0 / sym);
    });
    return out;
}

}  // namespace onet::pde
