#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "onet/model/checkpoint.hpp"
#include "onet/model/deeponet.hpp"
#include "onet/trunk/gadgets.hpp"
#include "test_util.hpp"

using namespace onet;

namespace {

// deliberately plain re-implementation of the forward pass for oracle checks
std::vector<double> straight_line_eval(const nn::NetworkSpec& spec, const nn::ParameterVector& pv,
                                       std::vector<double> cur) {
    for (int i = 0; i < spec.num_affine(); ++i) {
        std::vector<double> nxt(static_cast<std::size_t>(spec.rows(i)));
        for (int r = 0; r < spec.rows(i); ++r) {
            double acc = pv.b(i, r);
            for (int c = 0; c < spec.cols(i); ++c) acc += pv.w(i, r, c) * cur[static_cast<std::size_t>(c)];
            nxt[static_cast<std::size_t>(r)] = acc;
        }
        if (i < spec.depth()) {
            const nn::ActivationKind k = spec.hidden[static_cast<std::size_t>(i)].activation;
            for (double& v : nxt) {
                if (k == nn::ActivationKind::relu) v = v > 0.0 ? v : 0.0;
                if (k == nn::ActivationKind::requ) v = v > 0.0 ? v * v : 0.0;
            }
        }
        cur = std::move(nxt);
    }
    return cur;
}

spectral::GridSample random_sample(int dim, int enc_n, std::mt19937_64& rng) {
    spectral::GridSample g(dim, enc_n);
    for (double& v : g.values) v = math::uniform_sym(rng, 1.0);
    return g;
}

model::DeepONetModel constant_one_branch(nn::NetworkSpec trunk_spec, nn::ParameterVector trunk_params,
                                         int enc_n) {
    model::DeepONetModel m;
    m.dim = trunk_spec.input_dim;
    m.enc_n = enc_n;
    m.p = trunk_spec.output_dim;
    m.trunk_cfg.mode = model::TrunkMode::trainable;
    m.trunk_cfg.dim = m.dim;
    m.trunk_spec = std::move(trunk_spec);
    m.trunk_params = std::move(trunk_params);
    m.branch_spec.input_dim = static_cast<int>(m.num_sensors());
    m.branch_spec.hidden = {{2, nn::ActivationKind::relu}};
    m.branch_spec.output_dim = m.p;
    m.branch_params.emplace_back(m.branch_spec);
    for (int k = 0; k < m.p; ++k) m.branch_params[0].b(1, k) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("regime shapes split the budget", "[model]") {
    const model::RegimeShape wide = model::regime_shapes(10000, 1.0, 4, 2);
    CHECK(wide.width == 100);
    CHECK(wide.depth == 2);

    const model::RegimeShape deep = model::regime_shapes(10000, 2.0, 16, 2);
    CHECK(deep.width == 16);
    CHECK(deep.depth == 39);

    int prev_depth = 0;
    for (double lambda : {1.0, 1.25, 1.5, 1.75, 2.0}) {
        const model::RegimeShape s = model::regime_shapes(4000, lambda, 4, 2);
        CHECK(s.depth >= prev_depth);
        prev_depth = s.depth;
    }

    CHECK_THROWS_AS(model::regime_shapes(0, 1.0, 4, 2), std::invalid_argument);
    CHECK_THROWS_AS(model::regime_shapes(100, 0.5, 4, 2), std::invalid_argument);
    CHECK_THROWS_AS(model::regime_shapes(100, 2.5, 4, 2), std::invalid_argument);
}

TEST_CASE("branch parameter count tracks the budget", "[model]") {
    for (double lambda : {1.0, 1.25, 1.5, 1.75, 2.0}) {
        for (int q : {100, 1000, 10000}) {
            model::BranchRegime regime{lambda, q, 4, 2};
            model::TrunkConfig cfg;
            cfg.mode = model::TrunkMode::constructed;
            cfg.dim = 1;
            cfg.K = 2;
            cfg.n = 2;
            const model::DeepONetModel m = model::build_deeponet(4, 2, regime, cfg, 7);
            const double count = static_cast<double>(nn::count_params(m.branch_spec));
            INFO("lambda " << lambda << " q " << q << " params " << count);
            CHECK(count >= q / 4.0);
            CHECK(count <= q * 4.0);
            CHECK(m.d_theta() == m.branch_param_count());
        }
    }
}

TEST_CASE("constant model evaluates to one", "[model]") {
    model::BranchRegime regime{1.0, 100, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::constructed;
    cfg.dim = 1;
    cfg.K = 1;
    cfg.n = 1;
    model::DeepONetModel m = model::build_deeponet(1, 1, regime, cfg, 5);
    for (auto& pv : m.branch_params) pv.data.assign(pv.data.size(), 0.0);
    const int out_affine = m.branch_spec.depth();
    m.branch_params[0].b(out_affine, 0) = 1.0;

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const spectral::GridSample g = random_sample(1, 1, rng);
        const double y = math::uniform_unit(rng);
        CHECK(model::eval_model(m, g, {y}) == Catch::Approx(1.0).margin(1e-13));
    }
}

TEST_CASE("zero branch gives the zero operator", "[model]") {
    model::BranchRegime regime{1.5, 300, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::trainable;
    cfg.dim = 1;
    cfg.width = 6;
    cfg.depth = 2;
    model::DeepONetModel m = model::build_deeponet(3, 2, regime, cfg, 9);
    for (auto& pv : m.branch_params) pv.data.assign(pv.data.size(), 0.0);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const spectral::GridSample g = random_sample(1, 2, rng);
        CHECK(model::eval_model(m, g, {math::uniform_unit(rng)}) == 0.0);
    }
}

TEST_CASE("evaluation matches a straight-line oracle", "[model]") {
    std::mt19937_64 rng(17);
    model::BranchRegime regime{1.0, 200, 4, 2};

    model::TrunkConfig constructed;
    constructed.mode = model::TrunkMode::constructed;
    constructed.dim = 1;
    constructed.K = 2;
    constructed.n = 3;
    model::TrunkConfig trainable;
    trainable.mode = model::TrunkMode::trainable;
    trainable.dim = 1;
    trainable.width = 7;
    trainable.depth = 2;

    for (int variant = 0; variant < 4; ++variant) {
        const bool use_constructed = variant % 2 == 0;
        const model::BranchSharing sharing =
            variant < 2 ? model::BranchSharing::shared : model::BranchSharing::per_k;
        const model::TrunkConfig& cfg = use_constructed ? constructed : trainable;
        const model::DeepONetModel m = model::build_deeponet(6, 2, regime, cfg, 23 + variant, sharing);
        for (int trial = 0; trial < 25; ++trial) {
            const spectral::GridSample g = random_sample(1, 2, rng);
            const std::vector<double> y = {math::uniform_unit(rng)};

            std::vector<double> b;
            if (sharing == model::BranchSharing::shared) {
                b = straight_line_eval(m.branch_spec, m.branch_params[0], g.values);
            } else {
                for (const auto& pv : m.branch_params)
                    b.push_back(straight_line_eval(m.branch_spec, pv, g.values)[0]);
            }
            double want = 0.0;
            for (int k = 0; k < m.p; ++k) {
                const double t =
                    use_constructed
                        ? straight_line_eval(m.basis.specs[static_cast<std::size_t>(k)],
                                             m.basis.params[static_cast<std::size_t>(k)], y)[0]
                        : straight_line_eval(m.trunk_spec, m.trunk_params, y)[static_cast<std::size_t>(k)];
                want += b[static_cast<std::size_t>(k)] * t;
            }
            CHECK(testutil::rel_err(model::eval_model(m, g, y), want, 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("jets reduce to closed forms on gadget trunks", "[model]") {
    auto [sq_spec, sq_params] = trunk::to_network(trunk::monomial_net({2}, 1));
    const model::DeepONetModel square = constant_one_branch(sq_spec, sq_params, 1);
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const spectral::GridSample g = random_sample(1, 1, rng);
        const double y = math::uniform_sym(rng, 3.0);
        const nn::Jet2 jet = model::eval_model_jet(square, g, {y});
        CHECK(jet.value == Catch::Approx(y * y).margin(1e-12));
        CHECK(jet.gradient[0] == Catch::Approx(2.0 * y).margin(1e-12));
        CHECK(jet.laplacian == Catch::Approx(2.0).margin(1e-12));
    }

    nn::NetworkSpec lin_spec;
    lin_spec.input_dim = 1;
    lin_spec.output_dim = 1;
    nn::ParameterVector lin_params(lin_spec);
    lin_params.w(0, 0, 0) = -3.25;
    lin_params.b(0, 0) = 0.75;
    const model::DeepONetModel line = constant_one_branch(lin_spec, lin_params, 1);
    const spectral::GridSample g = random_sample(1, 1, rng);
    const nn::Jet2 jet = model::eval_model_jet(line, g, {0.4});
    CHECK(jet.value == Catch::Approx(-3.25 * 0.4 + 0.75).margin(1e-14));
    CHECK(jet.gradient[0] == -3.25);
    CHECK(jet.laplacian == 0.0);
}

TEST_CASE("jets agree with finite differences of the evaluation", "[model]") {
    std::mt19937_64 rng(29);
    model::BranchRegime regime{1.0, 150, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::trainable;
    cfg.dim = 1;
    cfg.width = 8;
    cfg.depth = 2;
    const model::DeepONetModel m = model::build_deeponet(4, 2, regime, cfg, 31);
    const spectral::GridSample g = random_sample(1, 2, rng);
    auto f = [&](const std::vector<double>& y) { return model::eval_model(m, g, y); };

    int checked = 0;
    while (checked < 40) {
        const std::vector<double> y = {math::uniform_unit(rng)};
        if (testutil::min_preactivation_abs(m.trunk_spec, m.trunk_params, y) < 1e-2) continue;
        ++checked;
        const nn::Jet2 jet = model::eval_model_jet(m, g, y);
        CHECK(testutil::rel_err(jet.value, f(y), 1e-6) <= 1e-12);
        CHECK(testutil::rel_err(jet.gradient[0], testutil::central_diff(f, y, 0, 1e-6), 1e-6) <= 1e-5);
        CHECK(testutil::rel_err(jet.laplacian, testutil::second_diff(f, y, 0, 2e-5), 1e-4) <= 1e-4);
    }

    // constructed trunk, same drill
    model::TrunkConfig built;
    built.mode = model::TrunkMode::constructed;
    built.dim = 1;
    built.K = 2;
    built.n = 2;
    const model::DeepONetModel mc = model::build_deeponet(4, 2, regime, built, 37);
    auto fc = [&](const std::vector<double>& y) { return model::eval_model(mc, g, y); };
    checked = 0;
    while (checked < 40) {
        const std::vector<double> y = {math::uniform_unit(rng)};
        double gap = 1e300;
        for (int k = 0; k < mc.p; ++k)
            gap = std::min(gap, testutil::min_preactivation_abs(mc.basis.specs[static_cast<std::size_t>(k)],
                                                                mc.basis.params[static_cast<std::size_t>(k)],
                                                                y));
        if (gap < 1e-2) continue;
        ++checked;
        const nn::Jet2 jet = model::eval_model_jet(mc, g, y);
        CHECK(testutil::rel_err(jet.value, fc(y), 1e-6) <= 1e-12);
        CHECK(testutil::rel_err(jet.gradient[0], testutil::central_diff(fc, y, 0, 1e-6), 1e-6) <= 1e-5);
        // a wider stencil: second-differencing the ~1e-14 cancellation residue
        // of inactive bumps at h=2e-5 would swamp a true laplacian of zero
        const double fd_lap = testutil::second_diff(fc, y, 0, 1e-4);
        CHECK(std::abs(jet.laplacian - fd_lap) <= 1e-3 * (1.0 + std::abs(fd_lap)));
    }
}

TEST_CASE("scaling the branch readout scales the operator", "[model]") {
    std::mt19937_64 rng(41);
    model::BranchRegime regime{1.0, 200, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::trainable;
    cfg.dim = 1;
    cfg.width = 6;
    cfg.depth = 2;
    model::DeepONetModel m = model::build_deeponet(3, 2, regime, cfg, 43);
    const spectral::GridSample g = random_sample(1, 2, rng);
    const std::vector<double> y = {0.37};
    const double base = model::eval_model(m, g, y);

    const int out_affine = m.branch_spec.depth();
    auto& pv = m.branch_params[0];
    for (int r = 0; r < m.branch_spec.rows(out_affine); ++r) {
        for (int c = 0; c < m.branch_spec.cols(out_affine); ++c) pv.w(out_affine, r, c) *= 3.5;
        pv.b(out_affine, r) *= 3.5;
    }
    CHECK(model::eval_model(m, g, y) == Catch::Approx(3.5 * base).epsilon(1e-13));
}

TEST_CASE("classical preset matches the direct formula", "[model]") {
    const int m_sensors = 5, q = 7, p = 3;
    const model::DeepONetModel m = model::classical_preset(m_sensors, q, p, 47);
    REQUIRE(m.sharing == model::BranchSharing::per_k);
    REQUIRE(m.branch_params.size() == 3);
    CHECK(m.branch_param_count() == static_cast<std::size_t>(p * (m_sensors * q + 2 * q + 1)));

    std::mt19937_64 rng(53);
    auto relu = [](double v) { return v > 0.0 ? v : 0.0; };
    for (int trial = 0; trial < 40; ++trial) {
        const spectral::GridSample g = random_sample(1, 2, rng);
        const double y = math::uniform_unit(rng);

        double want = 0.0;
        for (int k = 0; k < p; ++k) {
            const auto& pv = m.branch_params[static_cast<std::size_t>(k)];
            double branch = pv.b(1, 0);
            for (int i = 0; i < q; ++i) {
                double pre = pv.b(0, i);
                for (int j = 0; j < m_sensors; ++j)
                    pre += pv.w(0, i, j) * g.values[static_cast<std::size_t>(j)];
                branch += pv.w(1, 0, i) * relu(pre);
            }
            const double trunk = relu(m.trunk_params.w(0, k, 0) * y + m.trunk_params.b(0, k));
            want += branch * trunk;
        }
        CHECK(testutil::rel_err(model::eval_model(m, g, {y}), want, 1.0) <= 1e-12);
    }

    CHECK_THROWS_AS(model::classical_preset(5, 7, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(model::classical_preset(6, 7, 2, 1), std::invalid_argument);
    const spectral::GridSample g = random_sample(1, 2, rng);
    CHECK_THROWS(model::eval_model_jet(m, g, {0.5}));
}

TEST_CASE("seeds change parameters but not shapes", "[model]") {
    model::BranchRegime regime{1.0, 100, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::trainable;
    cfg.dim = 1;
    cfg.width = 5;
    cfg.depth = 2;
    const model::DeepONetModel a = model::build_deeponet(2, 1, regime, cfg, 1);
    const model::DeepONetModel b = model::build_deeponet(2, 1, regime, cfg, 2);
    CHECK(a.branch_spec.hidden.size() == b.branch_spec.hidden.size());
    CHECK(a.d_theta() == b.d_theta());
    bool differ = false;
    for (std::size_t i = 0; i < a.branch_params[0].data.size(); ++i)
        differ = differ || a.branch_params[0].data[i] != b.branch_params[0].data[i];
    CHECK(differ);

    const model::DeepONetModel a2 = model::build_deeponet(2, 1, regime, cfg, 1);
    CHECK(a.branch_params[0].data == a2.branch_params[0].data);
}

TEST_CASE("mismatched grids and basis sizes are rejected", "[model]") {
    model::BranchRegime regime{1.0, 100, 4, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::constructed;
    cfg.dim = 1;
    cfg.K = 2;
    cfg.n = 2;
    CHECK_THROWS_AS(model::build_deeponet(5, 2, regime, cfg, 3), std::invalid_argument);
    CHECK_THROWS_AS(model::build_deeponet(0, 2, regime, cfg, 3), std::invalid_argument);

    const model::DeepONetModel m = model::build_deeponet(4, 2, regime, cfg, 3);
    spectral::GridSample wrong(1, 3);
    CHECK_THROWS_AS(model::eval_model(m, wrong, {0.5}), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip the model", "[model]") {
    std::mt19937_64 rng(61);
    model::BranchRegime regime{1.5, 400, 4, 2};

    model::TrunkConfig built;
    built.mode = model::TrunkMode::constructed;
    built.dim = 1;
    built.K = 2;
    built.n = 2;
    model::TrunkConfig learned;
    learned.mode = model::TrunkMode::trainable;
    learned.dim = 1;
    learned.width = 6;
    learned.depth = 2;

    int variant = 0;
    for (const model::TrunkConfig& cfg : {built, learned}) {
        const model::DeepONetModel m = model::build_deeponet(4, 2, regime, cfg, 71 + variant);
        const std::string path = "checkpoint_roundtrip_" + std::to_string(variant) + ".txt";
        model::write_model(m, path);
        const model::DeepONetModel back = model::read_model(path);
        CHECK(back.p == m.p);
        CHECK(back.enc_n == m.enc_n);
        CHECK(back.d_theta() == m.d_theta());
        CHECK(back.sharing == m.sharing);
        for (int trial = 0; trial < 20; ++trial) {
            const spectral::GridSample g = random_sample(1, 2, rng);
            const double y = math::uniform_unit(rng);
            CHECK(model::eval_model(back, g, {y}) == model::eval_model(m, g, {y}));
        }
        std::remove(path.c_str());
        ++variant;
    }
}
