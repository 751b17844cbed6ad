#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace onet::math {

using MultiIndex = std::vector<int>;

[[nodiscard]] inline int order(const MultiIndex& alpha) {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
}

[[nodiscard]] inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

[[nodiscard]] inline double multi_factorial(const MultiIndex& alpha) {
    double f = 1.0;
    for (int a : alpha) f *= factorial(a);
    return f;
}

[[nodiscard]] inline double pow_multi(const std::vector<double>& x, const MultiIndex& alpha) {
    double p = 1.0;
    for (std::size_t j = 0; j < alpha.size(); ++j)
        for (int i = 0; i < alpha[j]; ++i) p *= x[j];
    return p;
}

// All alpha in N^dim with |alpha| <= max_order, graded lexicographic:
// ordered by |alpha| first, then lexicographically within each grade.
[[nodiscard]] inline std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
    if (dim < 1) throw std::invalid_argument("multi_indices_up_to: dim must be positive");
    if (max_order < 0) throw std::invalid_argument("multi_indices_up_to: negative order");
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<std::size_t>(dim), 0);
    for (int total = 0; total <= max_order; ++total) {
        // enumerate compositions of `total` into dim parts, lexicographically
        auto rec = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == dim - 1) {
                cur[static_cast<std::size_t>(pos)] = remaining;
                out.push_back(cur);
                return;
            }
            for (int a = remaining; a >= 0; --a) {
                cur[static_cast<std::size_t>(pos)] = a;
                self(self, pos + 1, remaining - a);
            }
        };
        rec(rec, 0, total);
    }
    return out;
}

[[nodiscard]] inline std::size_t count_multi_indices(int dim, int max_order) {
    // binom(max_order + dim, dim)
    double c = 1.0;
    for (int i = 1; i <= dim; ++i) c = c * (max_order + i) / i;
    return static_cast<std::size_t>(c + 0.5);
}

}  // namespace onet::math
