#pragma once

#include <stdexcept>
#include <vector>

namespace onet::trunk {

// Reference plateau bump: C^1, piecewise quadratic, supported on [0, 6],
// identically 1 on [1, 5]. Pieces (half-open from the left):
//   [0, 1/2): 2 t^2          [1/2, 1): 1 - 2 (t-1)^2      [1, 5): 1
//   [5, 5.5): 1 - 2 (t-5)^2  [5.5, 6): 2 (t-6)^2
[[nodiscard]] inline double s_scalar(double t) {
    if (t <= 0.0 || t >= 6.0) return 0.0;
    if (t < 0.5) return 2.0 * t * t;
    if (t < 1.0) return 1.0 - 2.0 * (t - 1.0) * (t - 1.0);
    if (t < 5.0) return 1.0;
    if (t < 5.5) return 1.0 - 2.0 * (t - 5.0) * (t - 5.0);
    return 2.0 * (t - 6.0) * (t - 6.0);
}

[[nodiscard]] inline double s_scalar_d1(double t) {
    if (t <= 0.0 || t >= 6.0) return 0.0;
    if (t < 0.5) return 4.0 * t;
    if (t < 1.0) return -4.0 * (t - 1.0);
    if (t < 5.0) return 0.0;
    if (t < 5.5) return -4.0 * (t - 5.0);
    return 4.0 * (t - 6.0);
}

[[nodiscard]] inline double s_scalar_d2(double t) {
    if (t <= 0.0 || t >= 6.0) return 0.0;
    if (t < 0.5) return 4.0;
    if (t < 1.0) return -4.0;
    if (t < 5.0) return 0.0;
    if (t < 5.5) return -4.0;
    return 4.0;
}

inline void check_cover_index(int K, int m) {
    if (K < 1) throw std::invalid_argument("partition: K must be positive");
    if (m < 1 || m > K) throw std::invalid_argument("partition: cover index out of range");
}

// Axis bump for cover cell m (1-based): s(4 K x + 5 - 4 m). Equal to 1 on the
// core cell [(m-1)/K, m/K], supported on the cell widened by 1/(4K).
[[nodiscard]] inline double s_m_scalar(double x, int K, int m) {
    check_cover_index(K, m);
    return s_scalar(4.0 * K * x + 5.0 - 4.0 * m);
}

[[nodiscard]] inline double s_m_scalar_d1(double x, int K, int m) {
    check_cover_index(K, m);
    return 4.0 * K * s_scalar_d1(4.0 * K * x + 5.0 - 4.0 * m);
}

[[nodiscard]] inline double s_m_scalar_d2(double x, int K, int m) {
    check_cover_index(K, m);
    return 16.0 * static_cast<double>(K) * K * s_scalar_d2(4.0 * K * x + 5.0 - 4.0 * m);
}

// Support of the tensor bump for multi cell m, clipped to the unit cube.
struct CoverBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

[[nodiscard]] inline CoverBox cover_box(const std::vector<int>& m, int K) {
    CoverBox box;
    for (int mj : m) {
        check_cover_index(K, mj);
        const double quarter = 1.0 / (4.0 * K);
        box.lo.push_back(std::max(0.0, static_cast<double>(mj - 1) / K - quarter));
        box.hi.push_back(std::min(1.0, static_cast<double>(mj) / K + quarter));
    }
    return box;
}

inline void check_domain(const std::vector<double>& x) {
    for (double v : x)
        if (v < 0.0 || v > 1.0) throw std::domain_error("partition: point outside the unit cube");
}

[[nodiscard]] inline double tensor_bump(const std::vector<double>& x, int K, const std::vector<int>& m) {
    if (x.size() != m.size()) throw std::invalid_argument("tensor_bump: dim mismatch");
    check_domain(x);
    double p = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) p *= s_m_scalar(x[j], K, m[static_cast<std::size_t>(j)]);
    return p;
}

// sum_{m in [K]^d} tensor_bump(x, K, m); factors across axes. Between 1 and
// 1.5^d on the cube: collars overlap, so the raw bumps are not a partition.
[[nodiscard]] inline double pu_raw_sum(const std::vector<double>& x, int K) {
    check_domain(x);
    double prod = 1.0;
    for (double xj : x) {
        double axis = 0.0;
        for (int m = 1; m <= K; ++m) axis += s_m_scalar(xj, K, m);
        prod *= axis;
    }
    return prod;
}

// tensor_bump / pu_raw_sum; these do sum to 1 across m for every x.
[[nodiscard]] inline double pu_normalized(const std::vector<double>& x, int K, const std::vector<int>& m) {
    return tensor_bump(x, K, m) / pu_raw_sum(x, K);
}

}  // namespace onet::trunk
