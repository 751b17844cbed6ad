#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "onet/nn/backprop.hpp"
#include "onet/nn/forward.hpp"
#include "onet/nn/jet.hpp"
#include "onet/nn/network.hpp"
#include "test_util.hpp"

using namespace onet;
using nn::ActivationKind;
using nn::NetworkSpec;
using nn::ParameterVector;

namespace {

NetworkSpec requ_spec(int in, std::vector<int> widths, int out) {
    NetworkSpec s;
    s.input_dim = in;
    for (int w : widths) s.hidden.push_back({w, ActivationKind::requ});
    s.output_dim = out;
    return s;
}

std::vector<double> random_point(std::mt19937_64& rng, int d, double half_width) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (double& v : x) v = math::uniform_sym(rng, half_width);
    return x;
}

// Draw points until the FD stencil is safely away from every activation kink.
std::vector<double> safe_point(const NetworkSpec& spec, const ParameterVector& pv,
                               std::mt19937_64& rng, double margin = 1e-2) {
    for (int tries = 0; tries < 1000; ++tries) {
        std::vector<double> x = random_point(rng, spec.input_dim, 1.0);
        if (testutil::min_preactivation_abs(spec, pv, x) > margin) return x;
    }
    FAIL("no kink-free point found");
    return {};
}

}  // namespace

TEST_CASE("activation kink conventions", "[nn]") {
    CHECK(nn::act(ActivationKind::relu, -1.5) == 0.0);
    CHECK(nn::act(ActivationKind::relu, 2.0) == 2.0);
    CHECK(nn::act_d1(ActivationKind::relu, 0.0) == 0.0);
    CHECK(nn::act(ActivationKind::requ, 3.0) == 9.0);
    CHECK(nn::act(ActivationKind::requ, -3.0) == 0.0);
    CHECK(nn::act_d1(ActivationKind::requ, 0.0) == 0.0);
    CHECK(nn::act_d2(ActivationKind::requ, 0.0) == 0.0);
    CHECK(nn::act_d2(ActivationKind::requ, 1e-12) == 2.0);
    CHECK(nn::act_d1(ActivationKind::requ, 2.0) == 4.0);
    CHECK(nn::is_c1(ActivationKind::requ));
    CHECK_FALSE(nn::is_c1(ActivationKind::relu));
}

TEST_CASE("parameter count and layout bijection", "[nn]") {
    NetworkSpec s = requ_spec(1, {16, 16}, 1);
    CHECK(nn::count_params(s) == 321);

    NetworkSpec t = requ_spec(3, {5, 7}, 2);
    const nn::ParamLayout lay = nn::ParamLayout::of(t);
    std::set<std::size_t> seen;
    for (int i = 0; i < t.num_affine(); ++i) {
        for (int r = 0; r < t.rows(i); ++r) {
            for (int c = 0; c < t.cols(i); ++c) seen.insert(lay.w_index(i, r, c));
            seen.insert(lay.b_index(i, r));
        }
    }
    CHECK(seen.size() == lay.total);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == lay.total - 1);
}

TEST_CASE("forward matches a hand-worked net", "[nn]") {
    NetworkSpec s = requ_spec(2, {2}, 1);
    ParameterVector pv(s);
    pv.w(0, 0, 0) = 1.0;
    pv.w(0, 0, 1) = 2.0;
    pv.w(0, 1, 0) = -1.0;
    pv.w(0, 1, 1) = 0.5;
    pv.b(0, 0) = 0.1;
    pv.b(0, 1) = -0.2;
    pv.w(1, 0, 0) = 2.0;
    pv.w(1, 0, 1) = -1.0;
    pv.b(1, 0) = 0.05;
    // pre = (2.1, -0.95), requ = (4.41, 0), out = 2*4.41 + 0.05
    CHECK(nn::forward_scalar(s, pv, {1.0, 0.5}) == Catch::Approx(8.87).epsilon(1e-14));
}

TEST_CASE("init_params is deterministic with zero biases and bounded weights", "[nn]") {
    NetworkSpec s = requ_spec(4, {9, 6}, 2);
    const ParameterVector a = nn::init_params(s, 42);
    const ParameterVector b = nn::init_params(s, 42);
    const ParameterVector c = nn::init_params(s, 43);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
    for (int i = 0; i < s.num_affine(); ++i) {
        const double bound = std::sqrt(3.0 / s.cols(i));
        for (int r = 0; r < s.rows(i); ++r) {
            CHECK(a.b(i, r) == 0.0);
            for (int cc = 0; cc < s.cols(i); ++cc) {
                CHECK(std::abs(a.w(i, r, cc)) <= bound);
            }
        }
    }
    const ParameterVector z = nn::init_params(s, 7, nn::InitScheme::zeros);
    CHECK(std::all_of(z.data.begin(), z.data.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("forward value equals jet value bitwise", "[nn]") {
    std::mt19937_64 rng(11);
    NetworkSpec s = requ_spec(3, {8, 8}, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const ParameterVector pv = nn::init_params(s, 100 + trial);
        const std::vector<double> x = random_point(rng, 3, 1.5);
        const std::vector<double> v = nn::forward(s, pv, x);
        const auto jets = nn::forward_jet2(s, pv, x);
        REQUIRE(jets.size() == 2);
        CHECK(v[0] == jets[0].value);
        CHECK(v[1] == jets[1].value);
    }
}

TEST_CASE("jet gradient and laplacian match finite differences", "[nn]") {
    std::mt19937_64 rng(21);
    NetworkSpec s = requ_spec(2, {8, 8}, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const ParameterVector pv = nn::init_params(s, 200 + trial);
        const std::vector<double> x = safe_point(s, pv, rng);
        auto f = [&](const std::vector<double>& y) { return nn::forward_scalar(s, pv, y); };
        const nn::Jet2 jet = nn::forward_jet2(s, pv, x)[0];

        double fd_lap = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            const double fd_g = testutil::central_diff(f, x, i, 1e-5);
            CHECK(testutil::rel_err(jet.gradient[i], fd_g, 1e-3) < 1e-6);
            fd_lap += testutil::second_diff(f, x, i, 1e-4);
        }
        CHECK(testutil::rel_err(jet.laplacian, fd_lap, 1e-2) < 1e-5);
    }
}

TEST_CASE("full hessian matches finite differences and laplacian mode", "[nn]") {
    std::mt19937_64 rng(31);
    NetworkSpec s = requ_spec(3, {6, 6}, 1);
    for (int trial = 0; trial < 6; ++trial) {
        const ParameterVector pv = nn::init_params(s, 300 + trial);
        const std::vector<double> x = safe_point(s, pv, rng);
        auto f = [&](const std::vector<double>& y) { return nn::forward_scalar(s, pv, y); };
        const nn::Jet2 full = nn::forward_jet2(s, pv, x, nn::JetMode::full)[0];
        const nn::Jet2 lap = nn::forward_jet2(s, pv, x, nn::JetMode::laplacian)[0];

        REQUIRE(full.hessian.size() == 9);
        double tr = 0.0;
        for (int a = 0; a < 3; ++a) {
            tr += full.hessian[static_cast<std::size_t>(a * 3 + a)];
            for (int b = 0; b < 3; ++b) {
                const double hab = full.hessian[static_cast<std::size_t>(a * 3 + b)];
                const double hba = full.hessian[static_cast<std::size_t>(b * 3 + a)];
                CHECK(hab == Catch::Approx(hba).margin(1e-12));
                const double fd = a == b
                                      ? testutil::second_diff(f, x, static_cast<std::size_t>(a), 1e-4)
                                      : testutil::mixed_diff(f, x, static_cast<std::size_t>(a),
                                                             static_cast<std::size_t>(b), 1e-4);
                CHECK(testutil::rel_err(hab, fd, 1e-2) < 1e-5);
            }
        }
        CHECK(testutil::rel_err(lap.laplacian, tr, 1e-10) < 1e-12);
        CHECK(full.laplacian == Catch::Approx(tr));
    }
}

TEST_CASE("jets reject nonsmooth and oversized requests", "[nn]") {
    NetworkSpec relu_net = requ_spec(2, {4}, 1);
    relu_net.hidden[0].activation = ActivationKind::relu;
    const ParameterVector pv = nn::init_params(relu_net, 1);
    CHECK_THROWS_AS(nn::forward_jet2(relu_net, pv, {0.1, 0.2}), std::invalid_argument);

    NetworkSpec wide = requ_spec(4, {4}, 1);
    const ParameterVector pw = nn::init_params(wide, 2);
    CHECK_THROWS_AS(nn::forward_jet2(wide, pw, {0.1, 0.2, 0.3, 0.4}, nn::JetMode::full),
                    std::invalid_argument);
    CHECK_NOTHROW(nn::forward_jet2(wide, pw, {0.1, 0.2, 0.3, 0.4}, nn::JetMode::laplacian));
}

TEST_CASE("backprop_value matches finite differences over parameters", "[nn]") {
    std::mt19937_64 rng(41);
    for (ActivationKind kind : {ActivationKind::requ, ActivationKind::relu}) {
        NetworkSpec s = requ_spec(2, {6, 5}, 2);
        for (auto& l : s.hidden) l.activation = kind;
        const ParameterVector pv = nn::init_params(s, 400);
        const std::vector<double> x = safe_point(s, pv, rng);
        const std::vector<double> seed = {0.7, -1.3};

        const std::vector<double> grad = nn::backprop_value(s, pv, x, seed);
        REQUIRE(grad.size() == pv.data.size());

        auto loss = [&](const std::vector<double>& theta) {
            ParameterVector q = pv;
            q.data = theta;
            const std::vector<double> out = nn::forward(s, q, x);
            return seed[0] * out[0] + seed[1] * out[1];
        };
        for (std::size_t i = 0; i < grad.size(); i += 7) {
            const double fd = testutil::central_diff(loss, pv.data, i, 1e-6);
            CHECK(testutil::rel_err(grad[i], fd, 1e-3) < 1e-6);
        }
    }
}

TEST_CASE("backprop_jet matches finite differences over parameters", "[nn]") {
    std::mt19937_64 rng(51);
    NetworkSpec s = requ_spec(2, {7, 6}, 3);
    const ParameterVector pv = nn::init_params(s, 500);
    const std::vector<double> x = safe_point(s, pv, rng);

    std::vector<nn::JetSeed> seeds(3);
    seeds[0] = {1.2, {0.3, -0.4}, 0.25};
    seeds[1] = {-0.6, {0.0, 1.1}, -0.9};
    seeds[2] = {0.0, {0.5, 0.5}, 1.0};

    const std::vector<double> grad = nn::backprop_jet(s, pv, x, seeds);

    auto functional = [&](const std::vector<double>& theta) {
        ParameterVector q = pv;
        q.data = theta;
        const auto jets = nn::forward_jet2(s, q, x);
        double acc = 0.0;
        for (std::size_t o = 0; o < 3; ++o) {
            acc += seeds[o].w_value * jets[o].value + seeds[o].w_laplacian * jets[o].laplacian;
            for (std::size_t l = 0; l < 2; ++l) acc += seeds[o].w_gradient[l] * jets[o].gradient[l];
        }
        return acc;
    };
    for (std::size_t i = 0; i < grad.size(); i += 5) {
        const double fd = testutil::central_diff(functional, pv.data, i, 1e-6);
        CHECK(testutil::rel_err(grad[i], fd, 1e-2) < 1e-6);
    }
}

TEST_CASE("backprop_jet with value-only seeds reproduces backprop_value exactly", "[nn]") {
    std::mt19937_64 rng(61);
    NetworkSpec s = requ_spec(3, {9, 4}, 2);
    const ParameterVector pv = nn::init_params(s, 600);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<double> x = random_point(rng, 3, 1.2);
        const std::vector<double> w = {0.8, -0.35};
        std::vector<nn::JetSeed> seeds(2);
        seeds[0] = {w[0], {0.0, 0.0, 0.0}, 0.0};
        seeds[1] = {w[1], {0.0, 0.0, 0.0}, 0.0};
        const std::vector<double> a = nn::backprop_value(s, pv, x, w);
        const std::vector<double> b = nn::backprop_jet(s, pv, x, seeds);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}
