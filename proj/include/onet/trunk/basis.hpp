#pragma once

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "onet/trunk/gadgets.hpp"

namespace onet::trunk {

// Full constructed trunk family: one requ net per pair (alpha, cover cell),
// alpha-major, cells in lexicographic order. p = #alphas * K^d.
struct TrunkBasis {
    int dim = 1;
    int K = 1;
    int n = 1;
    std::vector<math::MultiIndex> alphas;
    std::vector<std::vector<int>> boxes;
    std::vector<nn::NetworkSpec> specs;
    std::vector<nn::ParameterVector> params;
    int max_depth = 0;
    int max_width = 0;

    [[nodiscard]] int p() const { return static_cast<int>(specs.size()); }
    [[nodiscard]] std::size_t element_index(std::size_t alpha_idx, std::size_t box_idx) const {
        return alpha_idx * boxes.size() + box_idx;
    }
};

[[nodiscard]] inline std::vector<std::vector<int>> enumerate_boxes(int K, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> m(static_cast<std::size_t>(d), 1);
    while (true) {
        out.push_back(m);
        int axis = d - 1;
        while (axis >= 0) {
            if (++m[static_cast<std::size_t>(axis)] <= K) break;
            m[static_cast<std::size_t>(axis)] = 1;
            --axis;
        }
        if (axis < 0) return out;
    }
}

// Reference budget the constructions are held against (factor-2 check):
// depth 1 + ceil(log2 d) + ceil(log2 n), width 4n - 4 + 6d.
[[nodiscard]] inline int depth_budget(int n, int d) {
    const auto clog2 = [](int v) { return static_cast<int>(std::ceil(std::log2(static_cast<double>(v)))); };
    return 1 + (d > 1 ? clog2(d) : 0) + (n > 1 ? clog2(n) : 0);
}

[[nodiscard]] inline int width_budget(int n, int d) { return 4 * n - 4 + 6 * d; }

[[nodiscard]] inline TrunkBasis trunk_basis(int K, int n, int d) {
    if (n < 1) throw std::invalid_argument("trunk_basis: polynomial order must be positive");
    check_cover_index(K, 1);
    TrunkBasis basis;
    basis.dim = d;
    basis.K = K;
    basis.n = n;
    basis.alphas = math::multi_indices_up_to(d, n - 1);
    basis.boxes = enumerate_boxes(K, d);
    for (const math::MultiIndex& alpha : basis.alphas) {
        for (const std::vector<int>& m : basis.boxes) {
            DenseNet net = trunk_element_net(alpha, m, K);
            basis.max_depth = std::max(basis.max_depth, net.depth());
            basis.max_width = std::max(basis.max_width, net.max_width());
            auto [spec, pv] = to_network(net);
            basis.specs.push_back(std::move(spec));
            basis.params.push_back(std::move(pv));
        }
    }
    return basis;
}

[[nodiscard]] inline std::string basis_manifest(const TrunkBasis& basis) {
    nlohmann::json j;
    j["dim"] = basis.dim;
    j["K"] = basis.K;
    j["n"] = basis.n;
    j["p"] = basis.p();
    j["max_depth"] = basis.max_depth;
    j["max_width"] = basis.max_width;
    j["depth_budget"] = depth_budget(basis.n, basis.dim);
    j["width_budget"] = width_budget(basis.n, basis.dim);
    nlohmann::json elems = nlohmann::json::array();
    for (std::size_t a = 0; a < basis.alphas.size(); ++a) {
        for (std::size_t b = 0; b < basis.boxes.size(); ++b) {
            const std::size_t i = basis.element_index(a, b);
            nlohmann::json e;
            e["alpha"] = basis.alphas[a];
            e["box"] = basis.boxes[b];
            e["depth"] = basis.specs[i].depth();
            e["width"] = basis.specs[i].max_width();
            e["params"] = basis.params[i].layout.total;
            elems.push_back(std::move(e));
        }
    }
    j["elements"] = std::move(elems);
    return j.dump(2);
}

}  // namespace onet::trunk
