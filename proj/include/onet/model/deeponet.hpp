#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "onet/math/multi_index.hpp"
#include "onet/nn/backprop.hpp"
#include "onet/nn/forward.hpp"
#include "onet/nn/jet.hpp"
#include "onet/nn/network.hpp"
#include "onet/spectral/grid_sample.hpp"
#include "onet/trunk/basis.hpp"

namespace onet::model {

enum class TrunkMode { constructed, trainable };
enum class BranchSharing { shared, per_k };

[[nodiscard]] inline std::string to_string(TrunkMode m) {
    return m == TrunkMode::constructed ? "constructed" : "trainable";
}

[[nodiscard]] inline TrunkMode trunk_mode_from_string(const std::string& name) {
    if (name == "constructed") return TrunkMode::constructed;
    if (name == "trainable") return TrunkMode::trainable;
    throw std::invalid_argument("unknown trunk mode: " + name);
}

[[nodiscard]] inline std::string to_string(BranchSharing s) {
    return s == BranchSharing::shared ? "shared" : "per_k";
}

[[nodiscard]] inline BranchSharing branch_sharing_from_string(const std::string& name) {
    if (name == "shared") return BranchSharing::shared;
    if (name == "per_k") return BranchSharing::per_k;
    throw std::invalid_argument("unknown branch sharing: " + name);
}

// Depth-width tradeoff knob: lambda = 1 spends the budget on width at fixed
// depth, lambda = 2 on depth at fixed width.
struct BranchRegime {
    double lambda = 1.0;
    int q = 1000;
    int base_width = 4;
    int base_depth = 2;
};

struct RegimeShape {
    int width = 1;
    int depth = 1;
};

// width = max(W0, q^{(2-lambda)/2}); depth then spends the remaining budget,
// q / width^2, keeping the parameter count within a constant of q across the
// whole lambda range (the idealized q^{lambda-1} depth only matches when the
// width floor is inactive).
[[nodiscard]] inline RegimeShape regime_shapes(int q, double lambda, int base_width, int base_depth) {
    if (q < 1) throw std::invalid_argument("regime_shapes: budget must be positive");
    if (lambda < 1.0 || lambda > 2.0) throw std::invalid_argument("regime_shapes: lambda outside [1,2]");
    if (base_width < 1 || base_depth < 1)
        throw std::invalid_argument("regime_shapes: base shape must be positive");
    RegimeShape shape;
    shape.width = std::max(base_width,
                           static_cast<int>(std::llround(std::pow(q, 0.5 * (2.0 - lambda)))));
    const double layers = static_cast<double>(q) / (static_cast<double>(shape.width) * shape.width);
    shape.depth = std::max(base_depth, static_cast<int>(std::llround(layers)));
    return shape;
}

[[nodiscard]] inline RegimeShape regime_shapes(const BranchRegime& regime) {
    return regime_shapes(regime.q, regime.lambda, regime.base_width, regime.base_depth);
}

// Shapes of the trunk side of the pair. In constructed mode the trunk is the
// frozen requ basis {y^alpha s_m}; in trainable mode it is an ordinary requ
// network with p outputs.
struct TrunkConfig {
    TrunkMode mode = TrunkMode::constructed;
    int dim = 1;
    int K = 1;
    int n = 1;
    int width = 8;
    int depth = 2;
    nn::ActivationKind activation = nn::ActivationKind::requ;
};

struct DeepONetModel {
    int dim = 1;
    int enc_n = 0;
    int p = 1;
    BranchSharing sharing = BranchSharing::shared;
    BranchRegime regime;
    TrunkConfig trunk_cfg;

    nn::NetworkSpec branch_spec;
    std::vector<nn::ParameterVector> branch_params;

    trunk::TrunkBasis basis;
    nn::NetworkSpec trunk_spec;
    nn::ParameterVector trunk_params;

    [[nodiscard]] std::size_t num_sensors() const {
        return spectral::GridSample::num_points(dim, enc_n);
    }

    [[nodiscard]] std::size_t branch_param_count() const {
        std::size_t total = 0;
        for (const auto& pv : branch_params) total += pv.layout.total;
        return total;
    }

    // trainable parameter dimension (theta of the optimizer); the constructed
    // trunk is frozen and does not count
    [[nodiscard]] std::size_t d_theta() const {
        std::size_t total = branch_param_count();
        if (trunk_cfg.mode == TrunkMode::trainable) total += trunk_params.layout.total;
        return total;
    }
};

[[nodiscard]] inline DeepONetModel build_deeponet(int p, int N, const BranchRegime& regime,
                                                  const TrunkConfig& trunk_cfg, std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("build_deeponet: p must be positive");
    if (N < 0) throw std::invalid_argument("build_deeponet: encoder order must be nonnegative");
    if (trunk_cfg.dim < 1) throw std::invalid_argument("build_deeponet: dim must be positive");

    DeepONetModel model;
    model.dim = trunk_cfg.dim;
    model.enc_n = N;
    model.p = p;
    model.regime = regime;
    model.trunk_cfg = trunk_cfg;

    const RegimeShape shape = regime_shapes(regime);
    const int m = static_cast<int>(model.num_sensors());
    model.branch_spec.input_dim = m;
    model.branch_spec.hidden.assign(static_cast<std::size_t>(shape.depth),
                                    {shape.width, nn::ActivationKind::relu});
    model.sharing = BranchSharing::shared;
    model.branch_spec.output_dim = p;
    model.branch_params.push_back(nn::init_params(model.branch_spec, seed));

    if (trunk_cfg.mode == TrunkMode::constructed) {
        model.basis = trunk::trunk_basis(trunk_cfg.K, trunk_cfg.n, trunk_cfg.dim);
        if (model.basis.p() != p)
            throw std::invalid_argument("build_deeponet: constructed basis has p = " +
                                        std::to_string(model.basis.p()) + ", not " + std::to_string(p));
    } else {
        if (trunk_cfg.width < 1 || trunk_cfg.depth < 1)
            throw std::invalid_argument("build_deeponet: trunk shape must be positive");
        model.trunk_spec.input_dim = trunk_cfg.dim;
        model.trunk_spec.hidden.assign(static_cast<std::size_t>(trunk_cfg.depth),
                                       {trunk_cfg.width, trunk_cfg.activation});
        model.trunk_spec.output_dim = p;
        model.trunk_params = nn::init_params(model.trunk_spec, seed ^ 0x9e3779b97f4a7c15ULL);
    }
    return model;
}

[[nodiscard]] inline DeepONetModel build_deeponet(int p, int N, const BranchRegime& regime,
                                                  const TrunkConfig& trunk_cfg, std::uint64_t seed,
                                                  BranchSharing sharing) {
    DeepONetModel model = build_deeponet(p, N, regime, trunk_cfg, seed);
    if (sharing == BranchSharing::per_k) {
        model.sharing = BranchSharing::per_k;
        model.branch_spec.output_dim = 1;
        model.branch_params.clear();
        for (int k = 0; k < p; ++k)
            model.branch_params.push_back(
                nn::init_params(model.branch_spec, seed + static_cast<std::uint64_t>(k)));
    }
    return model;
}

namespace detail {

inline void check_sample(const DeepONetModel& model, const spectral::GridSample& g) {
    if (g.dim != model.dim || g.enc_n != model.enc_n)
        throw std::invalid_argument("eval_model: sample grid does not match the encoder");
    if (g.values.size() != model.num_sensors())
        throw std::invalid_argument("eval_model: sample size mismatch");
}

}  // namespace detail

[[nodiscard]] inline std::vector<double> branch_outputs(const DeepONetModel& model,
                                                        const spectral::GridSample& g) {
    detail::check_sample(model, g);
    if (model.sharing == BranchSharing::shared)
        return nn::forward(model.branch_spec, model.branch_params[0], g.values);
    std::vector<double> out(static_cast<std::size_t>(model.p));
    for (int k = 0; k < model.p; ++k)
        out[static_cast<std::size_t>(k)] =
            nn::forward(model.branch_spec, model.branch_params[static_cast<std::size_t>(k)], g.values)[0];
    return out;
}

[[nodiscard]] inline std::vector<double> trunk_values(const DeepONetModel& model,
                                                      const std::vector<double>& y) {
    if (model.trunk_cfg.mode == TrunkMode::constructed) {
        std::vector<double> out(static_cast<std::size_t>(model.p));
        for (int k = 0; k < model.p; ++k)
            out[static_cast<std::size_t>(k)] = nn::forward(model.basis.specs[static_cast<std::size_t>(k)],
                                                           model.basis.params[static_cast<std::size_t>(k)],
                                                           y)[0];
        return out;
    }
    return nn::forward(model.trunk_spec, model.trunk_params, y);
}

[[nodiscard]] inline std::vector<nn::Jet2> trunk_jets(const DeepONetModel& model,
                                                      const std::vector<double>& y) {
    if (model.trunk_cfg.mode == TrunkMode::constructed) {
        std::vector<nn::Jet2> out;
        out.reserve(static_cast<std::size_t>(model.p));
        for (int k = 0; k < model.p; ++k)
            out.push_back(nn::forward_jet2(model.basis.specs[static_cast<std::size_t>(k)],
                                           model.basis.params[static_cast<std::size_t>(k)], y)[0]);
        return out;
    }
    return nn::forward_jet2(model.trunk_spec, model.trunk_params, y);
}

[[nodiscard]] inline double eval_model(const DeepONetModel& model, const spectral::GridSample& g,
                                       const std::vector<double>& y) {
    const std::vector<double> b = branch_outputs(model, g);
    const std::vector<double> t = trunk_values(model, y);
    double acc = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) acc += b[k] * t[k];
    return acc;
}

[[nodiscard]] inline nn::Jet2 eval_model_jet(const DeepONetModel& model, const spectral::GridSample& g,
                                             const std::vector<double>& y) {
    const std::vector<double> b = branch_outputs(model, g);
    const std::vector<nn::Jet2> t = trunk_jets(model, y);
    nn::Jet2 out;
    out.gradient.assign(static_cast<std::size_t>(model.dim), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) {
        out.value += b[k] * t[k].value;
        out.laplacian += b[k] * t[k].laplacian;
        for (std::size_t a = 0; a < out.gradient.size(); ++a)
            out.gradient[a] += b[k] * t[k].gradient[a];
    }
    return out;
}

// One-hidden-layer relu branch per pair and a single relu neuron per trunk
// output: the classical formulation. Evaluation only; the relu trunk has no
// second-order jets.
[[nodiscard]] inline DeepONetModel classical_preset(int m, int q_branch, int p, std::uint64_t seed,
                                                    int dim = 1) {
    if (p < 1) throw std::invalid_argument("classical_preset: p must be positive");
    if (q_branch < 1) throw std::invalid_argument("classical_preset: branch width must be positive");
    if (dim < 1) throw std::invalid_argument("classical_preset: dim must be positive");
    // m must be (2N+1)^dim for some integer N
    int root = static_cast<int>(std::llround(std::pow(static_cast<double>(m), 1.0 / dim)));
    bool ok = false;
    for (int cand = std::max(1, root - 1); cand <= root + 1 && !ok; ++cand) {
        long long prod = 1;
        for (int j = 0; j < dim; ++j) prod *= cand;
        if (prod == m && cand % 2 == 1) {
            root = cand;
            ok = true;
        }
    }
    if (!ok) throw std::invalid_argument("classical_preset: m is not a (2N+1)^d sensor count");

    DeepONetModel model;
    model.dim = dim;
    model.enc_n = (root - 1) / 2;
    model.p = p;
    model.sharing = BranchSharing::per_k;
    model.regime = BranchRegime{1.0, q_branch, q_branch, 1};
    model.trunk_cfg.mode = TrunkMode::trainable;
    model.trunk_cfg.dim = dim;
    model.trunk_cfg.width = p;
    model.trunk_cfg.depth = 1;
    model.trunk_cfg.activation = nn::ActivationKind::relu;

    model.branch_spec.input_dim = m;
    model.branch_spec.hidden = {{q_branch, nn::ActivationKind::relu}};
    model.branch_spec.output_dim = 1;
    for (int k = 0; k < p; ++k)
        model.branch_params.push_back(nn::init_params(model.branch_spec, seed + static_cast<std::uint64_t>(k)));

    model.trunk_spec.input_dim = dim;
    model.trunk_spec.hidden = {{p, nn::ActivationKind::relu}};
    model.trunk_spec.output_dim = p;
    model.trunk_params = nn::init_params(model.trunk_spec, seed ^ 0x9e3779b97f4a7c15ULL);
    // readout = identity so output k is exactly the activation of neuron k
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) model.trunk_params.w(1, r, c) = r == c ? 1.0 : 0.0;
        model.trunk_params.b(1, r) = 0.0;
    }
    return model;
}

}  // namespace onet::model
