#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/math/multi_index.hpp"

namespace onet::spectral {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Trigonometric polynomial on the periodic unit cube: sum over k in
// [-max_mode, max_mode]^dim of coeff(k) * exp(i 2 pi k.x), stored dense in
// row-major order. Real-valued fields keep coeff(-k) == conj(coeff(k)).
class FourierField {
public:
    FourierField() = default;
    FourierField(int dim, int max_mode) : dim_(dim), max_mode_(max_mode) {
        if (dim < 1) throw std::invalid_argument("FourierField: dim must be positive");
        if (max_mode < 0) throw std::invalid_argument("FourierField: negative max_mode");
        std::size_t n = 1;
        for (int j = 0; j < dim; ++j) n *= static_cast<std::size_t>(2 * max_mode + 1);
        coeffs_.assign(n, {0.0, 0.0});
    }

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int max_mode() const { return max_mode_; }
    [[nodiscard]] std::size_t num_modes() const { return coeffs_.size(); }

    [[nodiscard]] std::size_t flat_index(const std::vector<int>& k) const {
        if (static_cast<int>(k.size()) != dim_) throw std::invalid_argument("FourierField: mode dim mismatch");
        std::size_t idx = 0;
        for (int j = 0; j < dim_; ++j) {
            const int kj = k[static_cast<std::size_t>(j)];
            if (kj < -max_mode_ || kj > max_mode_)
                throw std::out_of_range("FourierField: mode outside band");
            idx = idx * static_cast<std::size_t>(2 * max_mode_ + 1) +
                  static_cast<std::size_t>(kj + max_mode_);
        }
        return idx;
    }

    [[nodiscard]] std::complex<double> coeff(const std::vector<int>& k) const {
        return coeffs_[flat_index(k)];
    }
    void set_coeff(const std::vector<int>& k, std::complex<double> c) { coeffs_[flat_index(k)] = c; }

    [[nodiscard]] const std::vector<std::complex<double>>& raw() const { return coeffs_; }
    [[nodiscard]] std::vector<std::complex<double>>& raw() { return coeffs_; }

    // Row-major walk over the whole band; fn(kvec, flat_idx).
    template <typename F>
    void for_each_mode(F&& fn) const {
        std::vector<int> k(static_cast<std::size_t>(dim_), -max_mode_);
        std::size_t idx = 0;
        while (true) {
            fn(static_cast<const std::vector<int>&>(k), idx);
            ++idx;
            int axis = dim_ - 1;
            while (axis >= 0) {
                if (++k[static_cast<std::size_t>(axis)] <= max_mode_) break;
                k[static_cast<std::size_t>(axis)] = -max_mode_;
                --axis;
            }
            if (axis < 0) return;
        }
    }

    [[nodiscard]] std::complex<double> evaluate_complex(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("FourierField: point dim mismatch");
        std::complex<double> acc{0.0, 0.0};
        for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
            double phase = 0.0;
            for (int j = 0; j < dim_; ++j) phase += k[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            phase *= two_pi;
            acc += coeffs_[idx] * std::complex<double>(std::cos(phase), std::sin(phase));
        });
        return acc;
    }

    [[nodiscard]] double evaluate(const std::vector<double>& x) const {
        return evaluate_complex(x).real();
    }

    // D^alpha f(x): each mode picks up prod_j (i 2 pi k_j)^{alpha_j}.
    [[nodiscard]] double evaluate_deriv(const std::vector<double>& x, const math::MultiIndex& alpha) const {
        if (static_cast<int>(alpha.size()) != dim_)
            throw std::invalid_argument("FourierField: derivative order dim mismatch");
        std::complex<double> acc{0.0, 0.0};
        for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
            std::complex<double> mult{1.0, 0.0};
            double phase = 0.0;
            for (int j = 0; j < dim_; ++j) {
                const double kj = k[static_cast<std::size_t>(j)];
                phase += kj * x[static_cast<std::size_t>(j)];
                for (int a = 0; a < alpha[static_cast<std::size_t>(j)]; ++a)
                    mult *= std::complex<double>(0.0, two_pi * kj);
            }
            phase *= two_pi;
            acc += coeffs_[idx] * mult * std::complex<double>(std::cos(phase), std::sin(phase));
        });
        return acc.real();
    }

    [[nodiscard]] bool is_conjugate_symmetric(double tol) const {
        bool ok = true;
        for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
            std::vector<int> neg(k.size());
            for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
            const std::complex<double> a = coeffs_[idx];
            const std::complex<double> b = coeff(neg);
            if (std::abs(a - std::conj(b)) > tol) ok = false;
        });
        return ok;
    }

private:
    int dim_ = 1;
    int max_mode_ = 0;
    std::vector<std::complex<double>> coeffs_ = {{0.0, 0.0}};
};

// a - b, embedded into the wider band of the two.
[[nodiscard]] inline FourierField subtract(const FourierField& a, const FourierField& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("subtract: dim mismatch");
    FourierField out(a.dim(), std::max(a.max_mode(), b.max_mode()));
    a.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        out.set_coeff(k, out.coeff(k) + a.raw()[idx]);
    });
    b.for_each_mode([&](const std::vector<int>& k, std::size_t idx) {
        out.set_coeff(k, out.coeff(k) - b.raw()[idx]);
    });
    return out;
}

[[nodiscard]] inline bool lex_positive(const std::vector<int>& k) {
    for (int v : k) {
        if (v > 0) return true;
        if (v < 0) return false;
    }
    return false;
}

}  // namespace onet::spectral
