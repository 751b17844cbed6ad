#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "onet/math/multi_index.hpp"
#include "onet/math/quadrature.hpp"
#include "onet/spectral/fourier_field.hpp"
#include "onet/trunk/basis.hpp"
#include "onet/trunk/local_poly.hpp"
#include "onet/trunk/partition.hpp"

namespace onet::trunk {

enum class CoeffMode { ls, taylor };

[[nodiscard]] inline std::string to_string(CoeffMode mode) {
    return mode == CoeffMode::ls ? "ls" : "taylor";
}

[[nodiscard]] inline CoeffMode coeff_mode_from_string(const std::string& name) {
    if (name == "ls") return CoeffMode::ls;
    if (name == "taylor") return CoeffMode::taylor;
    throw std::invalid_argument("unknown coefficient mode: " + name);
}

struct Jet2Field {
    double value = 0.0;
    std::vector<double> grad;
    std::vector<double> hess;

    [[nodiscard]] double laplacian() const {
        const std::size_t d = grad.size();
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += hess[j * d + j];
        return acc;
    }
};

// Sum over cover cells of local polynomial times normalized bump. Piecewise
// smooth with continuous first derivatives, so second-order jets are defined
// away from the bump knots; jet() returns the one-sided values the partition
// evaluators produce there.
struct AssembledApprox {
    int dim = 1;
    int K = 1;
    int n = 1;
    CoeffMode mode = CoeffMode::ls;
    std::vector<std::vector<int>> boxes;
    std::vector<LocalPoly> cells;
    bool quadrature_converged = true;

    [[nodiscard]] double eval(const std::vector<double>& x) const {
        check_domain(x);
        const auto axes = axis_tables(x);
        double den = 1.0;
        for (int j = 0; j < dim; ++j) den *= axes.sum_v[static_cast<std::size_t>(j)];
        double acc = 0.0;
        for (std::size_t c = 0; c < boxes.size(); ++c) {
            double bump = 1.0;
            for (int j = 0; j < dim; ++j) {
                bump *= axes.v[static_cast<std::size_t>(j)][static_cast<std::size_t>(boxes[c][static_cast<std::size_t>(j)] - 1)];
                if (bump == 0.0) break;
            }
            if (bump != 0.0) acc += cells[c].eval(x) * bump / den;
        }
        return acc;
    }

    [[nodiscard]] Jet2Field jet(const std::vector<double>& x) const {
        check_domain(x);
        const std::size_t d = static_cast<std::size_t>(dim);
        const auto axes = axis_tables(x);

        // raw sum S = prod_j S_j and its first/second partials
        std::vector<double> s_grad(d), s_hess(d * d);
        double s_val = 1.0;
        for (std::size_t j = 0; j < d; ++j) s_val *= axes.sum_v[j];
        for (std::size_t a = 0; a < d; ++a) {
            double g = axes.sum_d1[a];
            for (std::size_t j = 0; j < d; ++j)
                if (j != a) g *= axes.sum_v[j];
            s_grad[a] = g;
            for (std::size_t b = 0; b <= a; ++b) {
                double h = a == b ? axes.sum_d2[a] : axes.sum_d1[a] * axes.sum_d1[b];
                for (std::size_t j = 0; j < d; ++j)
                    if (j != a && j != b) h *= axes.sum_v[j];
                s_hess[a * d + b] = h;
                s_hess[b * d + a] = h;
            }
        }

        Jet2Field out;
        out.grad.assign(d, 0.0);
        out.hess.assign(d * d, 0.0);
        std::vector<double> t_grad(d), t_hess(d * d), p_grad(d);
        math::MultiIndex beta(d, 0);
        for (std::size_t c = 0; c < boxes.size(); ++c) {
            bool dead = false;
            for (std::size_t j = 0; j < d && !dead; ++j) {
                const std::size_t mj = static_cast<std::size_t>(boxes[c][j] - 1);
                dead = axes.v[j][mj] == 0.0 && axes.d1[j][mj] == 0.0 && axes.d2[j][mj] == 0.0;
            }
            if (dead) continue;

            double t_val = 1.0;
            for (std::size_t j = 0; j < d; ++j)
                t_val *= axes.v[j][static_cast<std::size_t>(boxes[c][j] - 1)];
            for (std::size_t a = 0; a < d; ++a) {
                double g = axes.d1[a][static_cast<std::size_t>(boxes[c][a] - 1)];
                for (std::size_t j = 0; j < d; ++j)
                    if (j != a) g *= axes.v[j][static_cast<std::size_t>(boxes[c][j] - 1)];
                t_grad[a] = g;
                for (std::size_t b = 0; b <= a; ++b) {
                    double h = a == b ? axes.d2[a][static_cast<std::size_t>(boxes[c][a] - 1)]
                                      : axes.d1[a][static_cast<std::size_t>(boxes[c][a] - 1)] *
                                            axes.d1[b][static_cast<std::size_t>(boxes[c][b] - 1)];
                    for (std::size_t j = 0; j < d; ++j)
                        if (j != a && j != b) h *= axes.v[j][static_cast<std::size_t>(boxes[c][j] - 1)];
                    t_hess[a * d + b] = h;
                    t_hess[b * d + a] = h;
                }
            }

            // quotient rule for p = T/S, then product rule against q
            const double p_val = t_val / s_val;
            for (std::size_t a = 0; a < d; ++a) p_grad[a] = (t_grad[a] - p_val * s_grad[a]) / s_val;

            const double q_val = cells[c].eval(x);
            std::vector<double> q_grad(d);
            for (std::size_t a = 0; a < d; ++a) {
                beta.assign(d, 0);
                beta[a] = 1;
                q_grad[a] = cells[c].eval_deriv(x, beta);
            }

            out.value += q_val * p_val;
            for (std::size_t a = 0; a < d; ++a) out.grad[a] += q_grad[a] * p_val + q_val * p_grad[a];
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b <= a; ++b) {
                    const double p_ab =
                        (t_hess[a * d + b] - p_grad[a] * s_grad[b] - p_grad[b] * s_grad[a] -
                         p_val * s_hess[a * d + b]) /
                        s_val;
                    beta.assign(d, 0);
                    beta[a] += 1;
                    beta[b] += 1;
                    const double q_ab = cells[c].eval_deriv(x, beta);
                    const double h =
                        q_ab * p_val + q_grad[a] * p_grad[b] + q_grad[b] * p_grad[a] + q_val * p_ab;
                    out.hess[a * d + b] += h;
                    if (a != b) out.hess[b * d + a] += h;
                }
            }
        }
        return out;
    }

    [[nodiscard]] double deriv(const std::vector<double>& x, const math::MultiIndex& beta) const {
        const int ord = math::order(beta);
        if (ord == 0) return eval(x);
        if (ord > 2) throw std::invalid_argument("AssembledApprox::deriv: only jets up to order 2");
        const Jet2Field j = jet(x);
        if (ord == 1) {
            for (std::size_t a = 0; a < beta.size(); ++a)
                if (beta[a] == 1) return j.grad[a];
        }
        std::size_t first = beta.size(), second = beta.size();
        for (std::size_t a = 0; a < beta.size(); ++a) {
            if (beta[a] == 2) return j.hess[a * beta.size() + a];
            if (beta[a] == 1) (first == beta.size() ? first : second) = a;
        }
        return j.hess[first * beta.size() + second];
    }

  private:
    struct AxisTables {
        std::vector<std::vector<double>> v, d1, d2;
        std::vector<double> sum_v, sum_d1, sum_d2;
    };

    [[nodiscard]] AxisTables axis_tables(const std::vector<double>& x) const {
        const std::size_t d = static_cast<std::size_t>(dim);
        AxisTables t;
        t.v.assign(d, std::vector<double>(static_cast<std::size_t>(K)));
        t.d1 = t.v;
        t.d2 = t.v;
        t.sum_v.assign(d, 0.0);
        t.sum_d1.assign(d, 0.0);
        t.sum_d2.assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            for (int m = 1; m <= K; ++m) {
                const double v = s_m_scalar(x[j], K, m);
                const double g = s_m_scalar_d1(x[j], K, m);
                const double h = s_m_scalar_d2(x[j], K, m);
                t.v[j][static_cast<std::size_t>(m - 1)] = v;
                t.d1[j][static_cast<std::size_t>(m - 1)] = g;
                t.d2[j][static_cast<std::size_t>(m - 1)] = h;
                t.sum_v[j] += v;
                t.sum_d1[j] += g;
                t.sum_d2[j] += h;
            }
        }
        return t;
    }
};

template <typename Fn>
[[nodiscard]] AssembledApprox assemble_fit(const Fn& fn, int dim, int K, int n, CoeffMode mode,
                                           int quad_res = 0) {
    if (K < 1) throw std::invalid_argument("assemble_fit: K must be positive");
    AssembledApprox out;
    out.dim = dim;
    out.K = K;
    out.n = n;
    out.mode = mode;
    out.boxes = enumerate_boxes(K, dim);
    const int res = quad_res > 0 ? quad_res : (mode == CoeffMode::ls ? std::max(12, n + 2) : 24);
    out.cells.reserve(out.boxes.size());
    for (const auto& m : out.boxes) {
        LocalPoly cell = mode == CoeffMode::ls ? local_poly_fit(fn, m, K, n, res)
                                               : averaged_taylor_fit(fn, m, K, n, res);
        out.quadrature_converged = out.quadrature_converged && cell.quadrature_converged;
        out.cells.push_back(std::move(cell));
    }
    return out;
}

[[nodiscard]] inline AssembledApprox assemble_vK(const spectral::FourierField& v, int K, int n,
                                                 CoeffMode mode = CoeffMode::ls, int quad_res = 0) {
    return assemble_fit(FieldFn{&v}, v.dim(), K, n, mode, quad_res);
}

// Midpoint-rule H^k distance between a band-limited field and the assembled
// approximant, summing |D^beta(v - vK)|^2 over all |beta| <= k.
[[nodiscard]] inline double approx_error_hk(const spectral::FourierField& v, const AssembledApprox& vk,
                                            int k, int grid_res) {
    if (k < 0 || k > 2) throw std::invalid_argument("approx_error_hk: order must be 0, 1, or 2");
    if (grid_res < 2) throw std::invalid_argument("approx_error_hk: grid too coarse");
    const int d = v.dim();
    const auto betas = math::multi_indices_up_to(d, k);
    const std::vector<double> nodes = math::midpoint_nodes(grid_res);
    double acc = 0.0;
    std::vector<double> x(static_cast<std::size_t>(d));
    double cell_vol = 1.0;
    for (int j = 0; j < d; ++j) cell_vol /= grid_res;
    math::for_each_tensor_index(d, grid_res, [&](const std::vector<int>& idx) {
        for (int j = 0; j < d; ++j)
            x[static_cast<std::size_t>(j)] = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        const Jet2Field jet = vk.jet(x);
        for (const auto& beta : betas) {
            double approx;
            const int ord = math::order(beta);
            if (ord == 0) {
                approx = jet.value;
            } else if (ord == 1) {
                approx = 0.0;
                for (std::size_t a = 0; a < beta.size(); ++a)
                    if (beta[a] == 1) approx = jet.grad[a];
            } else {
                std::size_t first = beta.size(), second = beta.size();
                for (std::size_t a = 0; a < beta.size(); ++a) {
                    if (beta[a] == 2) first = second = a;
                    else if (beta[a] == 1) (first == beta.size() ? first : second) = a;
                }
                approx = jet.hess[first * beta.size() + second];
            }
            const double diff = v.evaluate_deriv(x, beta) - approx;
            acc += cell_vol * diff * diff;
        }
    });
    return std::sqrt(acc);
}

}  // namespace onet::trunk
