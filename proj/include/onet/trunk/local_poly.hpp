#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/math/linalg.hpp"
#include "onet/math/multi_index.hpp"
#include "onet/math/quadrature.hpp"
#include "onet/spectral/fourier_field.hpp"
#include "onet/trunk/partition.hpp"

namespace onet::trunk {

// ---- polynomial calculus on global monomials --------------------------------

[[nodiscard]] inline double poly_eval(const std::vector<math::MultiIndex>& alphas,
                                      const std::vector<double>& coeffs, const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) acc += coeffs[i] * math::pow_multi(x, alphas[i]);
    return acc;
}

[[nodiscard]] inline double poly_eval_deriv(const std::vector<math::MultiIndex>& alphas,
                                            const std::vector<double>& coeffs, const std::vector<double>& x,
                                            const math::MultiIndex& beta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const math::MultiIndex& a = alphas[i];
        double term = coeffs[i];
        bool alive = true;
        for (std::size_t j = 0; j < a.size() && alive; ++j) {
            const int aj = a[j], bj = beta[j];
            if (aj < bj) {
                alive = false;
                break;
            }
            for (int t = 0; t < bj; ++t) term *= aj - t;
            for (int t = 0; t < aj - bj; ++t) term *= x[j];
        }
        if (alive) acc += term;
    }
    return acc;
}

// Polynomial in global monomials attached to one cover cell.
struct LocalPoly {
    std::vector<int> box;
    std::vector<math::MultiIndex> alphas;
    std::vector<double> coeffs;
    bool quadrature_converged = true;

    [[nodiscard]] double eval(const std::vector<double>& x) const { return poly_eval(alphas, coeffs, x); }
    [[nodiscard]] double eval_deriv(const std::vector<double>& x, const math::MultiIndex& beta) const {
        return poly_eval_deriv(alphas, coeffs, x, beta);
    }
};

// Adapter so fits run on spectral fields and on explicit polynomials alike.
struct FieldFn {
    const spectral::FourierField* f;
    [[nodiscard]] double value(const std::vector<double>& x) const { return f->evaluate(x); }
    [[nodiscard]] double deriv(const std::vector<double>& x, const math::MultiIndex& g) const {
        return f->evaluate_deriv(x, g);
    }
};

struct PolyFn {
    std::vector<math::MultiIndex> alphas;
    std::vector<double> coeffs;
    [[nodiscard]] double value(const std::vector<double>& x) const { return poly_eval(alphas, coeffs, x); }
    [[nodiscard]] double deriv(const std::vector<double>& x, const math::MultiIndex& g) const {
        return poly_eval_deriv(alphas, coeffs, x, g);
    }
};

namespace detail {

[[nodiscard]] inline std::size_t find_alpha(const std::vector<math::MultiIndex>& alphas,
                                            const math::MultiIndex& target) {
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (alphas[i] == target) return i;
    throw std::logic_error("find_alpha: index not in enumeration");
}

[[nodiscard]] inline double binom(int n, int k) {
    return math::factorial(n) / (math::factorial(k) * math::factorial(n - k));
}

// Rewrites sum_beta local[beta] * prod_j ((x_j - c_j)/h_j)^{beta_j} as
// coefficients on plain monomials x^gamma.
[[nodiscard]] inline std::vector<double> local_to_global(const std::vector<math::MultiIndex>& alphas,
                                                         const std::vector<double>& local,
                                                         const std::vector<double>& center,
                                                         const std::vector<double>& half) {
    const std::size_t d = center.size();
    std::vector<double> global(alphas.size(), 0.0);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const math::MultiIndex& beta = alphas[i];
        double scale = local[i];
        for (std::size_t j = 0; j < d; ++j) scale /= std::pow(half[j], beta[j]);
        // expand one axis at a time
        std::vector<std::pair<math::MultiIndex, double>> terms = {
            {math::MultiIndex(d, 0), scale}};
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<std::pair<math::MultiIndex, double>> next;
            for (const auto& [gamma, coef] : terms) {
                for (int g = 0; g <= beta[j]; ++g) {
                    math::MultiIndex ng = gamma;
                    ng[j] = g;
                    next.emplace_back(std::move(ng),
                                      coef * binom(beta[j], g) * std::pow(-center[j], beta[j] - g));
                }
            }
            terms = std::move(next);
        }
        for (const auto& [gamma, coef] : terms) global[find_alpha(alphas, gamma)] += coef;
    }
    return global;
}

}  // namespace detail

// Least-squares fit of a degree-(n-1) polynomial over the cover cell, Gauss-
// Legendre tensor quadrature with quad_res nodes per axis. The normal
// equations are assembled in centered, scaled coordinates and the solution is
// mapped back to plain monomial coefficients.
template <typename Fn>
[[nodiscard]] LocalPoly local_poly_fit(const Fn& fn, const std::vector<int>& m, int K, int n,
                                       int quad_res = 12) {
    const int d = static_cast<int>(m.size());
    if (n < 1) throw std::invalid_argument("local_poly_fit: polynomial order must be positive");
    if (quad_res < n) throw std::invalid_argument("local_poly_fit: quad_res below polynomial order");
    const CoverBox box = cover_box(m, K);
    std::vector<math::GaussLegendre> axis_quad;
    std::vector<double> center(static_cast<std::size_t>(d)), half(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        axis_quad.push_back(math::gauss_legendre(quad_res, box.lo[static_cast<std::size_t>(j)],
                                                 box.hi[static_cast<std::size_t>(j)]));
        center[static_cast<std::size_t>(j)] =
            0.5 * (box.lo[static_cast<std::size_t>(j)] + box.hi[static_cast<std::size_t>(j)]);
        half[static_cast<std::size_t>(j)] =
            0.5 * (box.hi[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)]);
    }

    const std::vector<math::MultiIndex> alphas = math::multi_indices_up_to(d, n - 1);
    const std::size_t nb = alphas.size();
    std::vector<double> gram(nb * nb, 0.0), rhs(nb, 0.0);
    std::vector<double> x(static_cast<std::size_t>(d)), t(static_cast<std::size_t>(d)), basis(nb);
    math::for_each_tensor_index(d, quad_res, [&](const std::vector<int>& idx) {
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            const auto& q = axis_quad[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(j)] = q.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            w *= q.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            t[static_cast<std::size_t>(j)] =
                (x[static_cast<std::size_t>(j)] - center[static_cast<std::size_t>(j)]) /
                half[static_cast<std::size_t>(j)];
        }
        for (std::size_t i = 0; i < nb; ++i) basis[i] = math::pow_multi(t, alphas[i]);
        const double v = fn.value(x);
        for (std::size_t i = 0; i < nb; ++i) {
            rhs[i] += w * v * basis[i];
            for (std::size_t k = 0; k <= i; ++k) gram[i * nb + k] += w * basis[i] * basis[k];
        }
    });
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t k = i + 1; k < nb; ++k) gram[i * nb + k] = gram[k * nb + i];

    LocalPoly poly;
    poly.box = m;
    poly.alphas = alphas;
    poly.coeffs = detail::local_to_global(alphas, math::solve_spd(gram, rhs), center, half);
    return poly;
}

namespace detail {

template <typename Fn>
[[nodiscard]] std::vector<double> averaged_taylor_pass(const Fn& fn, const CoverBox& box,
                                                       const std::vector<math::MultiIndex>& alphas, int n,
                                                       int quad_res) {
    const int d = static_cast<int>(box.lo.size());
    std::vector<double> x0(static_cast<std::size_t>(d));
    double r = 1e300;
    for (int j = 0; j < d; ++j) {
        x0[static_cast<std::size_t>(j)] =
            0.5 * (box.lo[static_cast<std::size_t>(j)] + box.hi[static_cast<std::size_t>(j)]);
        r = std::min(r, 0.5 * (box.hi[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)]));
    }
    std::vector<math::GaussLegendre> axis_quad;
    for (int j = 0; j < d; ++j)
        axis_quad.push_back(math::gauss_legendre(quad_res, x0[static_cast<std::size_t>(j)] - r,
                                                 x0[static_cast<std::size_t>(j)] + r));

    // accumulate, for every gamma = alpha + beta, the moments
    //   I(gamma, beta) = int D^gamma fn (y) y^beta b(y) dy  (b unnormalized)
    std::vector<double> y(static_cast<std::size_t>(d));
    double z = 0.0;
    std::vector<double> moments(alphas.size() * alphas.size(), 0.0);
    math::for_each_tensor_index(d, quad_res, [&](const std::vector<int>& idx) {
        double w = 1.0;
        double rho2 = 0.0;
        for (int j = 0; j < d; ++j) {
            const auto& q = axis_quad[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(j)] = q.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            w *= q.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            const double dy = (y[static_cast<std::size_t>(j)] - x0[static_cast<std::size_t>(j)]) / r;
            rho2 += dy * dy;
        }
        if (rho2 >= 1.0) return;
        const double bump = std::exp(-1.0 / (1.0 - rho2));
        z += w * bump;
        for (std::size_t gi = 0; gi < alphas.size(); ++gi) {
            const double dv = fn.deriv(y, alphas[gi]);
            for (std::size_t bi = 0; bi < alphas.size(); ++bi) {
                if (math::order(alphas[gi]) < math::order(alphas[bi])) continue;
                moments[gi * alphas.size() + bi] += w * bump * dv * math::pow_multi(y, alphas[bi]);
            }
        }
    });
    if (z <= 0.0) throw std::runtime_error("averaged_taylor: empty quadrature on the ball");

    std::vector<double> coeffs(alphas.size(), 0.0);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const math::MultiIndex& alpha = alphas[ai];
        double acc = 0.0;
        for (std::size_t bi = 0; bi < alphas.size(); ++bi) {
            const math::MultiIndex& beta = alphas[bi];
            if (math::order(alpha) + math::order(beta) > n - 1) continue;
            math::MultiIndex gamma(alpha.size());
            for (std::size_t j = 0; j < alpha.size(); ++j) gamma[j] = alpha[j] + beta[j];
            const double moment = moments[find_alpha(alphas, gamma) * alphas.size() + bi];
            const double sign = math::order(beta) % 2 == 0 ? 1.0 : -1.0;
            acc += sign / (math::multi_factorial(alpha) * math::multi_factorial(beta)) * moment;
        }
        coeffs[ai] = acc / z;
    }
    return coeffs;
}

}  // namespace detail

// Averaged Taylor polynomial: Taylor expansions about y, averaged against a
// normalized smooth bump on the ball inscribed in the cover cell. Reproduces
// polynomials of degree <= n-1. The convergence flag compares quad_res against
// 2 * quad_res and keeps the finer result.
template <typename Fn>
[[nodiscard]] LocalPoly averaged_taylor_fit(const Fn& fn, const std::vector<int>& m, int K, int n,
                                            int quad_res = 24) {
    const int d = static_cast<int>(m.size());
    if (n < 1) throw std::invalid_argument("averaged_taylor_fit: polynomial order must be positive");
    if (quad_res < 2) throw std::invalid_argument("averaged_taylor_fit: quad_res too small");
    const CoverBox box = cover_box(m, K);
    const std::vector<math::MultiIndex> alphas = math::multi_indices_up_to(d, n - 1);
    const std::vector<double> coarse = detail::averaged_taylor_pass(fn, box, alphas, n, quad_res);
    const std::vector<double> fine = detail::averaged_taylor_pass(fn, box, alphas, n, 2 * quad_res);
    LocalPoly poly;
    poly.box = m;
    poly.alphas = alphas;
    poly.coeffs = fine;
    for (std::size_t i = 0; i < fine.size(); ++i)
        if (std::abs(fine[i] - coarse[i]) > 1e-6) poly.quadrature_converged = false;
    return poly;
}

// sum over pairs |alpha| + |beta| <= n-1 of 1 / (alpha! beta!); the coefficient
// bound is |c_alpha| <= this * ||fn||_{W^{n-1,inf}}.
[[nodiscard]] inline double taylor_coeff_bound_const(int n, int d) {
    const auto alphas = math::multi_indices_up_to(d, n - 1);
    double acc = 0.0;
    for (const auto& a : alphas)
        for (const auto& b : alphas)
            if (math::order(a) + math::order(b) <= n - 1)
                acc += 1.0 / (math::multi_factorial(a) * math::multi_factorial(b));
    return acc;
}

[[nodiscard]] inline LocalPoly local_poly_coeffs_ls(const spectral::FourierField& v,
                                                    const std::vector<int>& m, int K, int n,
                                                    int quad_res = 12) {
    return local_poly_fit(FieldFn{&v}, m, K, n, quad_res);
}

[[nodiscard]] inline LocalPoly averaged_taylor_coeffs(const spectral::FourierField& v,
                                                      const std::vector<int>& m, int K, int n,
                                                      int quad_res = 24) {
    return averaged_taylor_fit(FieldFn{&v}, m, K, n, quad_res);
}

}  // namespace onet::trunk
