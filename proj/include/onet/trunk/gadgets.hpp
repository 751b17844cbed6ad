#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onet/math/multi_index.hpp"
#include "onet/nn/forward.hpp"
#include "onet/nn/network.hpp"
#include "onet/trunk/partition.hpp"

namespace onet::trunk {

// Explicit-weight feed-forward nets used to build exact requ constructions.
// Kept as raw matrices so composition stays simple; convertible to the
// (NetworkSpec, ParameterVector) pair at the end.
struct AffineMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> w;
    std::vector<double> b;

    [[nodiscard]] double& at(int r, int c) { return w[static_cast<std::size_t>(r * cols + c)]; }
    [[nodiscard]] double at(int r, int c) const { return w[static_cast<std::size_t>(r * cols + c)]; }
};

[[nodiscard]] inline AffineMap zero_affine(int rows, int cols) {
    AffineMap a;
    a.rows = rows;
    a.cols = cols;
    a.w.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    a.b.assign(static_cast<std::size_t>(rows), 0.0);
    return a;
}

struct DenseNet {
    int input_dim = 0;
    std::vector<AffineMap> affines;
    std::vector<nn::ActivationKind> acts;

    [[nodiscard]] int depth() const { return static_cast<int>(acts.size()); }
    [[nodiscard]] int output_dim() const { return affines.back().rows; }
    [[nodiscard]] int max_width() const {
        int w = 0;
        for (std::size_t i = 0; i + 1 < affines.size(); ++i) w = std::max(w, affines[i].rows);
        return w;
    }
};

[[nodiscard]] inline std::pair<nn::NetworkSpec, nn::ParameterVector> to_network(const DenseNet& net) {
    nn::NetworkSpec spec;
    spec.input_dim = net.input_dim;
    for (std::size_t i = 0; i + 1 < net.affines.size(); ++i)
        spec.hidden.push_back({net.affines[i].rows, net.acts[i]});
    spec.output_dim = net.affines.back().rows;
    nn::ParameterVector pv(spec);
    for (std::size_t i = 0; i < net.affines.size(); ++i) {
        const AffineMap& a = net.affines[i];
        const int ai = static_cast<int>(i);
        for (int r = 0; r < a.rows; ++r) {
            pv.b(ai, r) = a.b[static_cast<std::size_t>(r)];
            for (int c = 0; c < a.cols; ++c) pv.w(ai, r, c) = a.at(r, c);
        }
    }
    return {std::move(spec), std::move(pv)};
}

[[nodiscard]] inline std::vector<double> eval_dense(const DenseNet& net, const std::vector<double>& x) {
    const auto [spec, pv] = to_network(net);
    return nn::forward(spec, pv, x);
}

// ---- leaf nets -------------------------------------------------------------

[[nodiscard]] inline DenseNet dense_linear(const AffineMap& map) {
    DenseNet net;
    net.input_dim = map.cols;
    net.affines.push_back(map);
    return net;
}

[[nodiscard]] inline DenseNet dense_coordinate(int d, int axis) {
    AffineMap a = zero_affine(1, d);
    a.at(0, axis) = 1.0;
    return dense_linear(a);
}

[[nodiscard]] inline DenseNet dense_constant(int d, double value) {
    AffineMap a = zero_affine(1, d);
    a.b[0] = value;
    return dense_linear(a);
}

// ---- composition -----------------------------------------------------------

[[nodiscard]] inline AffineMap merge_affine(const AffineMap& outer, const AffineMap& inner) {
    if (outer.cols != inner.rows) throw std::invalid_argument("merge_affine: shape mismatch");
    AffineMap m = zero_affine(outer.rows, inner.cols);
    for (int r = 0; r < outer.rows; ++r) {
        double acc = outer.b[static_cast<std::size_t>(r)];
        for (int k = 0; k < outer.cols; ++k) acc += outer.at(r, k) * inner.b[static_cast<std::size_t>(k)];
        m.b[static_cast<std::size_t>(r)] = acc;
        for (int c = 0; c < inner.cols; ++c) {
            double w = 0.0;
            for (int k = 0; k < outer.cols; ++k) w += outer.at(r, k) * inner.at(k, c);
            m.at(r, c) = w;
        }
    }
    return m;
}

[[nodiscard]] inline DenseNet compose(const DenseNet& outer, const DenseNet& inner) {
    if (outer.input_dim != inner.output_dim()) throw std::invalid_argument("compose: width mismatch");
    DenseNet net;
    net.input_dim = inner.input_dim;
    for (std::size_t i = 0; i + 1 < inner.affines.size(); ++i) net.affines.push_back(inner.affines[i]);
    net.affines.push_back(merge_affine(outer.affines.front(), inner.affines.back()));
    for (std::size_t i = 1; i < outer.affines.size(); ++i) net.affines.push_back(outer.affines[i]);
    net.acts = inner.acts;
    net.acts.insert(net.acts.end(), outer.acts.begin(), outer.acts.end());
    return net;
}

[[nodiscard]] inline DenseNet parallel(const DenseNet& a, const DenseNet& b) {
    if (a.input_dim != b.input_dim) throw std::invalid_argument("parallel: input dim mismatch");
    if (a.depth() != b.depth()) throw std::invalid_argument("parallel: depth mismatch, pad first");
    for (std::size_t i = 0; i < a.acts.size(); ++i)
        if (a.acts[i] != b.acts[i]) throw std::invalid_argument("parallel: activation mismatch");
    DenseNet net;
    net.input_dim = a.input_dim;
    net.acts = a.acts;
    for (std::size_t i = 0; i < a.affines.size(); ++i) {
        const AffineMap& fa = a.affines[i];
        const AffineMap& fb = b.affines[i];
        const bool first = i == 0;
        AffineMap m = zero_affine(fa.rows + fb.rows, first ? a.input_dim : fa.cols + fb.cols);
        for (int r = 0; r < fa.rows; ++r) {
            m.b[static_cast<std::size_t>(r)] = fa.b[static_cast<std::size_t>(r)];
            for (int c = 0; c < fa.cols; ++c) m.at(r, c) = fa.at(r, c);
        }
        const int roff = fa.rows;
        const int coff = first ? 0 : fa.cols;
        for (int r = 0; r < fb.rows; ++r) {
            m.b[static_cast<std::size_t>(roff + r)] = fb.b[static_cast<std::size_t>(r)];
            for (int c = 0; c < fb.cols; ++c) m.at(roff + r, coff + c) = fb.at(r, c);
        }
        net.affines.push_back(std::move(m));
    }
    return net;
}

// ---- requ gadgets ----------------------------------------------------------

// channels -> 4*channels requ -> channels, computing the identity through
// requ(t) + requ(-t) = t^2: x = (requ(x+1) + requ(-x-1) - requ(x-1) - requ(1-x)) / 4.
[[nodiscard]] inline DenseNet identity_gadget(int channels) {
    AffineMap in = zero_affine(4 * channels, channels);
    AffineMap out = zero_affine(channels, 4 * channels);
    for (int c = 0; c < channels; ++c) {
        const double sign[4] = {1.0, -1.0, 1.0, -1.0};
        const double shift[4] = {1.0, -1.0, -1.0, 1.0};
        const double coef[4] = {0.25, 0.25, -0.25, -0.25};
        for (int k = 0; k < 4; ++k) {
            in.at(4 * c + k, c) = sign[k];
            in.b[static_cast<std::size_t>(4 * c + k)] = shift[k];
            out.at(c, 4 * c + k) = coef[k];
        }
    }
    DenseNet net;
    net.input_dim = channels;
    net.affines = {std::move(in), std::move(out)};
    net.acts = {nn::ActivationKind::requ};
    return net;
}

[[nodiscard]] inline DenseNet pad_to_depth(DenseNet net, int target_depth) {
    while (net.depth() < target_depth) net = compose(identity_gadget(net.output_dim()), net);
    return net;
}

// (x, y) -> xy with one requ layer: ((x+y)^2 - (x-y)^2) / 4.
[[nodiscard]] inline DenseNet product_head() {
    AffineMap in = zero_affine(4, 2);
    in.at(0, 0) = 1.0;
    in.at(0, 1) = 1.0;
    in.at(1, 0) = -1.0;
    in.at(1, 1) = -1.0;
    in.at(2, 0) = 1.0;
    in.at(2, 1) = -1.0;
    in.at(3, 0) = -1.0;
    in.at(3, 1) = 1.0;
    AffineMap out = zero_affine(1, 4);
    out.at(0, 0) = 0.25;
    out.at(0, 1) = 0.25;
    out.at(0, 2) = -0.25;
    out.at(0, 3) = -0.25;
    DenseNet net;
    net.input_dim = 2;
    net.affines = {std::move(in), std::move(out)};
    net.acts = {nn::ActivationKind::requ};
    return net;
}

[[nodiscard]] inline DenseNet product_of(const DenseNet& a, const DenseNet& b) {
    if (a.output_dim() != 1 || b.output_dim() != 1)
        throw std::invalid_argument("product_of: scalar factors required");
    const int target = std::max(a.depth(), b.depth());
    return compose(product_head(), parallel(pad_to_depth(a, target), pad_to_depth(b, target)));
}

// Standalone pairwise-product gadget net on R^2, exact on all of R^2.
[[nodiscard]] inline DenseNet product_net() { return product_head(); }

// x^alpha as a balanced product tree over the coordinate factors.
[[nodiscard]] inline DenseNet monomial_net(const math::MultiIndex& alpha, int d) {
    if (static_cast<int>(alpha.size()) != d) throw std::invalid_argument("monomial_net: dim mismatch");
    std::vector<DenseNet> factors;
    for (int j = 0; j < d; ++j) {
        if (alpha[static_cast<std::size_t>(j)] < 0) throw std::invalid_argument("monomial_net: negative power");
        for (int rep = 0; rep < alpha[static_cast<std::size_t>(j)]; ++rep)
            factors.push_back(dense_coordinate(d, j));
    }
    if (factors.empty()) return dense_constant(d, 1.0);
    while (factors.size() > 1) {
        std::vector<DenseNet> next;
        for (std::size_t i = 0; i + 1 < factors.size(); i += 2)
            next.push_back(product_of(factors[i], factors[i + 1]));
        if (factors.size() % 2 == 1) next.push_back(factors.back());
        factors = std::move(next);
    }
    return factors.front();
}

// Axis plateau bump as 6 requ neurons: s(t) = 2 requ(t) - 4 requ(t - 1/2)
// + 2 requ(t - 1) - 2 requ(t - 5) + 4 requ(t - 5.5) - 2 requ(t - 6) with
// t = 4 K x_axis + 5 - 4 m.
[[nodiscard]] inline DenseNet bump_axis_net(int d, int axis, int K, int m) {
    check_cover_index(K, m);
    const double knots[6] = {0.0, 0.5, 1.0, 5.0, 5.5, 6.0};
    const double coefs[6] = {2.0, -4.0, 2.0, -2.0, 4.0, -2.0};
    AffineMap in = zero_affine(6, d);
    AffineMap out = zero_affine(1, 6);
    for (int k = 0; k < 6; ++k) {
        in.at(k, axis) = 4.0 * K;
        in.b[static_cast<std::size_t>(k)] = 5.0 - 4.0 * m - knots[k];
        out.at(0, k) = coefs[k];
    }
    DenseNet net;
    net.input_dim = d;
    net.affines = {std::move(in), std::move(out)};
    net.acts = {nn::ActivationKind::requ};
    return net;
}

// Tensor bump prod_j s_{m_j}(x_j) as a product tree over axis bumps.
[[nodiscard]] inline DenseNet bump_net(int K, const std::vector<int>& m, int d) {
    if (static_cast<int>(m.size()) != d) throw std::invalid_argument("bump_net: dim mismatch");
    std::vector<DenseNet> factors;
    for (int j = 0; j < d; ++j) factors.push_back(bump_axis_net(d, j, K, m[static_cast<std::size_t>(j)]));
    while (factors.size() > 1) {
        std::vector<DenseNet> next;
        for (std::size_t i = 0; i + 1 < factors.size(); i += 2)
            next.push_back(product_of(factors[i], factors[i + 1]));
        if (factors.size() % 2 == 1) next.push_back(factors.back());
        factors = std::move(next);
    }
    return factors.front();
}

// One trunk basis element y^alpha * prod_j s_{m_j}(y_j).
[[nodiscard]] inline DenseNet trunk_element_net(const math::MultiIndex& alpha, const std::vector<int>& m,
                                                int K) {
    const int d = static_cast<int>(alpha.size());
    DenseNet bump = bump_net(K, m, d);
    if (math::order(alpha) == 0) return bump;
    return product_of(monomial_net(alpha, d), bump);
}

}  // namespace onet::trunk
