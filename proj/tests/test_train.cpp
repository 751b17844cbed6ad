#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "onet/math/linalg.hpp"
#include "onet/train/gap.hpp"
#include "onet/train/losses.hpp"
#include "onet/train/trainer.hpp"
#include "onet/trunk/basis.hpp"
#include "test_util.hpp"

using namespace onet;

namespace {

train::FieldSample constant_field_sample(double value, int enc_n) {
    spectral::FourierField f(1, 1);
    f.set_coeff({0}, {value, 0.0});
    return {f, spectral::encode_D(f, enc_n)};
}

model::DeepONetModel small_frozen_model(int p, int K, int n, std::uint64_t seed, int enc_n = 2,
                                        int width = 12) {
    model::BranchRegime regime{1.0, 200, width, 2};
    model::TrunkConfig cfg;
    cfg.mode = model::TrunkMode::constructed;
    cfg.dim = 1;
    cfg.K = K;
    cfg.n = n;
    return model::build_deeponet(p, enc_n, regime, cfg, seed);
}

void zero_branch(model::DeepONetModel& m) {
    for (auto& pv : m.branch_params) pv.data.assign(pv.data.size(), 0.0);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

// Closed-form solution map for a single Fourier mode, used as a hand-made
// model with identically zero residual.
struct ExactModeModel {
    int dim = 1;
    int enc_n = 1;
    double c = 1.0;
    double a = 0.0;
    double b = 0.0;
};

nn::Jet2 eval_model_jet(const ExactModeModel& m, const spectral::GridSample&,
                        const std::vector<double>& y) {
    const double w = 2.0 * std::numbers::pi;
    const double sym = w * w + m.c;
    const double th = w * y[0];
    nn::Jet2 jet;
    jet.mode = nn::JetMode::laplacian;
    jet.value = (m.a * std::cos(th) + m.b * std::sin(th)) / sym;
    jet.gradient = {w * (-m.a * std::sin(th) + m.b * std::cos(th)) / sym};
    jet.laplacian = -w * w * jet.value;
    return jet;
}

TEST_CASE("empirical loss hits closed forms", "[train]") {
    pde::OperatorSpec op{1.0};

    model::DeepONetModel zero = small_frozen_model(4, 2, 2, 3);
    zero_branch(zero);
    const std::vector<train::FieldSample> ones = {constant_field_sample(1.0, 2)};
    const std::vector<std::vector<double>> ys = {{0.1}, {0.35}, {0.62}, {0.9}};
    CHECK(train::loss_LS(zero, op, ones, ys) == 1.0);

    spectral::FourierField mode(1, 1);
    mode.set_coeff({1}, {0.4, -0.25});
    mode.set_coeff({-1}, {0.4, 0.25});
    const train::FieldSample fs{mode, spectral::encode_D(mode, 1)};
    ExactModeModel exact;
    exact.c = op.c;
    exact.a = 2.0 * 0.4;
    exact.b = 2.0 * 0.25;
    REQUIRE(mode.evaluate({0.3}) ==
            Catch::Approx(exact.a * std::cos(2.0 * std::numbers::pi * 0.3) +
                          exact.b * std::sin(2.0 * std::numbers::pi * 0.3))
                .margin(1e-12));
    CHECK(train::loss_LS(exact, op, {fs}, ys) <= 1e-20);
}

TEST_CASE("empirical loss matches a double-loop oracle", "[train]") {
    pde::OperatorSpec op{1.5};
    const model::DeepONetModel m = small_frozen_model(4, 2, 2, 11);
    std::mt19937_64 rng(101);
    std::vector<train::FieldSample> fs;
    for (int i = 0; i < 3; ++i) fs.push_back(train::draw_field(rng(), 1, 2, {2.0, 2, 10.0}));
    std::vector<std::vector<double>> ys;
    for (int j = 0; j < 7; ++j) ys.push_back({math::uniform_unit(rng)});

    double want = 0.0;
    for (const auto& f : fs) {
        for (const auto& y : ys) {
            const nn::Jet2 jet = model::eval_model_jet(m, f.grid, y);
            const double r = op.c * jet.value - jet.laplacian - f.field.evaluate(y);
            want += r * r;
        }
    }
    want /= static_cast<double>(fs.size() * ys.size());

    const double got = train::loss_LS(m, op, fs, ys);
    CHECK(testutil::rel_err(got, want, 1e-12) <= 1e-12);

    const auto [fast, grad] = train::loss_LS_grad(m, op, fs, ys);
    CHECK(testutil::rel_err(fast, want, 1e-12) <= 1e-12);
    CHECK(grad.size() == m.branch_params[0].data.size());

    std::vector<train::FieldSample> fs_perm = {fs[2], fs[0], fs[1]};
    std::vector<std::vector<double>> ys_perm(ys.rbegin(), ys.rend());
    CHECK(testutil::rel_err(train::loss_LS(m, op, fs_perm, ys_perm), got, 1e-12) <= 1e-12);
}

TEST_CASE("midpoint loss agrees with its limits", "[train]") {
    pde::OperatorSpec op{1.0};

    model::DeepONetModel zero = small_frozen_model(2, 1, 2, 5);
    zero_branch(zero);
    const std::vector<train::FieldSample> ones = {constant_field_sample(1.0, 2)};
    CHECK(train::loss_LM(zero, op, ones, 16) == 1.0);

    // band-limited residual: quadrature is already exact, refining is a no-op
    const std::vector<train::FieldSample> wave = {
        train::draw_field(404, 1, 2, {2.0, 2, 10.0})};
    const double coarse = train::loss_LM(zero, op, wave, 16);
    const double fine = train::loss_LM(zero, op, wave, 32);
    CHECK(std::abs(coarse - fine) <= 1e-4 * std::max(1.0, coarse));

    const model::DeepONetModel m = small_frozen_model(2, 1, 2, 7);
    const double lm = train::loss_LM(m, op, wave, 4096);
    std::mt19937_64 rng(2024);
    std::vector<std::vector<double>> ys;
    ys.reserve(100000);
    for (int j = 0; j < 100000; ++j) ys.push_back({math::uniform_unit(rng)});
    const double ls = train::loss_LS(m, op, wave, ys);
    CHECK(std::abs(ls - lm) <= 0.01 * lm);
}

TEST_CASE("collocation refinement approaches the midpoint loss", "[train]") {
    pde::OperatorSpec op{1.0};
    const model::DeepONetModel m = small_frozen_model(2, 1, 2, 7);
    const std::vector<train::FieldSample> wave = {
        train::draw_field(404, 1, 2, {2.0, 2, 10.0})};
    const double lm = train::loss_LM(m, op, wave, 4096);

    std::vector<double> med_gap;
    for (int P = 256; P <= 65536; P *= 4) {
        std::vector<double> gaps;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 rng(seed * 7919);
            std::vector<std::vector<double>> ys;
            ys.reserve(static_cast<std::size_t>(P));
            for (int j = 0; j < P; ++j) ys.push_back({math::uniform_unit(rng)});
            gaps.push_back(std::abs(train::loss_LS(m, op, wave, ys) - lm));
        }
        med_gap.push_back(median_of(gaps));
    }
    for (std::size_t l = 1; l < med_gap.size(); ++l) {
        INFO("level " << l << " gaps " << med_gap[l - 1] << " -> " << med_gap[l]);
        CHECK(med_gap[l] < med_gap[l - 1]);
    }
}

TEST_CASE("fresh-draw loss estimates the ensemble moment", "[train]") {
    pde::OperatorSpec op{1.0};
    train::EnsembleConfig ens{2.0, 2, 100.0};
    model::DeepONetModel zero = small_frozen_model(2, 1, 2, 5);
    zero_branch(zero);

    const train::LossEstimate est = train::loss_LD(zero, op, ens, 48, 32, 909);
    const double want = spectral::ensemble_expected_sq_norm(1, 2.0, 2);
    INFO("estimate " << est.mean << " +- " << est.std_error << " vs " << want);
    CHECK(std::abs(est.mean - want) <= 3.0 * est.std_error);

    const train::LossEstimate again = train::loss_LD(zero, op, ens, 48, 32, 909);
    CHECK(again.mean == est.mean);
    CHECK(again.std_error == est.std_error);

    std::mt19937_64 rng(909);
    const train::FieldSample first = train::draw_field(rng(), 1, zero.enc_n, ens);
    const train::LossEstimate single = train::loss_LD(zero, op, ens, 1, 32, 909);
    CHECK(single.mean == train::loss_LM(zero, op, {first}, 32));
    CHECK(single.std_error == 0.0);
}

TEST_CASE("loss gradient matches finite differences", "[train]") {
    pde::OperatorSpec op{1.0};
    train::EnsembleConfig ens{2.0, 2, 10.0};
    std::vector<train::FieldSample> fs;
    std::mt19937_64 rng(313);
    for (int i = 0; i < 3; ++i) fs.push_back(train::draw_field(rng(), 1, 1, ens));
    const std::vector<std::vector<double>> ys = {{0.17}, {0.43}, {0.71}, {0.89}};

    model::DeepONetModel m;
    m.dim = 1;
    m.enc_n = 1;
    m.p = 3;
    m.sharing = model::BranchSharing::shared;
    m.trunk_cfg.mode = model::TrunkMode::trainable;
    m.trunk_cfg.dim = 1;
    m.branch_spec.input_dim = 3;
    m.branch_spec.hidden = {{6, nn::ActivationKind::requ}};
    m.branch_spec.output_dim = 3;
    m.branch_params = {nn::init_params(m.branch_spec, 71)};
    m.trunk_spec.input_dim = 1;
    m.trunk_spec.hidden = {{6, nn::ActivationKind::requ}, {6, nn::ActivationKind::requ}};
    m.trunk_spec.output_dim = 3;
    m.trunk_params = nn::init_params(m.trunk_spec, 72);

    auto fd_check = [&](model::DeepONetModel& model) {
        const auto [loss, grad] = train::loss_LS_grad(model, op, fs, ys);
        REQUIRE(std::isfinite(loss));
        std::vector<double*> slots;
        for (auto& pv : model.branch_params)
            for (double& v : pv.data) slots.push_back(&v);
        if (model.trunk_cfg.mode == model::TrunkMode::trainable)
            for (double& v : model.trunk_params.data) slots.push_back(&v);
        REQUIRE(grad.size() == slots.size());
        const double h = 1e-5;
        for (std::size_t t = 0; t < slots.size(); ++t) {
            const double saved = *slots[t];
            *slots[t] = saved + h;
            const double up = train::loss_LS(model, op, fs, ys);
            *slots[t] = saved - h;
            const double dn = train::loss_LS(model, op, fs, ys);
            *slots[t] = saved;
            const double fd = (up - dn) / (2.0 * h);
            INFO("parameter " << t << " analytic " << grad[t] << " fd " << fd);
            CHECK(testutil::rel_err(grad[t], fd, 1e-5) <= 1e-4);
        }
    };
    fd_check(m);

    model::DeepONetModel per;
    per.dim = 1;
    per.enc_n = 1;
    per.p = 2;
    per.sharing = model::BranchSharing::per_k;
    per.trunk_cfg.mode = model::TrunkMode::constructed;
    per.trunk_cfg.dim = 1;
    per.trunk_cfg.K = 1;
    per.trunk_cfg.n = 2;
    per.basis = trunk::trunk_basis(1, 2, 1);
    per.branch_spec.input_dim = 3;
    per.branch_spec.hidden = {{5, nn::ActivationKind::requ}};
    per.branch_spec.output_dim = 1;
    per.branch_params = {nn::init_params(per.branch_spec, 73), nn::init_params(per.branch_spec, 74)};
    fd_check(per);
}

TEST_CASE("descent reaches the least-squares minimizer", "[train]") {
    model::DeepONetModel m;
    m.dim = 1;
    m.enc_n = 1;
    m.p = 1;
    m.sharing = model::BranchSharing::shared;
    m.trunk_cfg.mode = model::TrunkMode::constructed;
    m.trunk_cfg.dim = 1;
    m.trunk_cfg.K = 1;
    m.trunk_cfg.n = 1;
    m.basis = trunk::trunk_basis(1, 1, 1);
    m.branch_spec.input_dim = 3;
    m.branch_spec.output_dim = 1;
    m.branch_params.emplace_back(m.branch_spec);

    train::TrainConfig cfg;
    cfg.M = 6;
    cfg.P = 8;
    cfg.steps = 80000;
    cfg.step_size = 0.05;
    cfg.momentum = 0.9;
    cfg.seed = 5150;
    cfg.B_clip = 100.0;
    cfg.op = {1.0};
    cfg.ensemble = {1.0, 2, 10.0};

    // the trunk element is identically one, so the model is G(f)(y) = w.g + b
    // and the loss is an exact least-squares problem in (w, b)
    const train::TrainingSet set = train::draw_training_set(cfg, 1, 1);
    std::vector<double> gram(16, 0.0), rhs(4, 0.0);
    for (const auto& f : set.fs) {
        const std::vector<double> x = {f.grid.values[0], f.grid.values[1], f.grid.values[2], 1.0};
        double fsum = 0.0;
        for (const auto& y : set.ys) fsum += f.field.evaluate(y);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b)
                gram[static_cast<std::size_t>(a * 4 + b)] +=
                    cfg.op.c * cfg.op.c * static_cast<double>(cfg.P) * x[static_cast<std::size_t>(a)] *
                    x[static_cast<std::size_t>(b)];
            rhs[static_cast<std::size_t>(a)] += cfg.op.c * x[static_cast<std::size_t>(a)] * fsum;
        }
    }
    const std::vector<double> best = math::solve_spd(gram, rhs);

    // plain small-step descent first: the trace must be monotone
    model::DeepONetModel mono = m;
    train::TrainConfig cfg_mono = cfg;
    cfg_mono.steps = 1500;
    cfg_mono.step_size = 0.02;
    cfg_mono.momentum = 0.0;
    const train::TrainResult plain = train::train(mono, cfg_mono);
    REQUIRE(plain.finished);
    REQUIRE(plain.trace.size() == static_cast<std::size_t>(cfg_mono.steps) + 1);
    for (std::size_t t = 1; t < plain.trace.size(); ++t)
        CHECK(plain.trace[t] <= plain.trace[t - 1] * (1.0 + 1e-12) + 1e-18);

    const train::TrainResult result = train::train(m, cfg);
    REQUIRE(result.finished);
    const auto& pv = m.branch_params[0];
    CHECK(std::abs(pv.w(0, 0, 0) - best[0]) <= 1e-6);
    CHECK(std::abs(pv.w(0, 0, 1) - best[1]) <= 1e-6);
    CHECK(std::abs(pv.w(0, 0, 2) - best[2]) <= 1e-6);
    CHECK(std::abs(pv.b(0, 0) - best[3]) <= 1e-6);
}

TEST_CASE("training is deterministic and respects clipping", "[train]") {
    train::TrainConfig cfg;
    cfg.M = 4;
    cfg.P = 8;
    cfg.steps = 40;
    cfg.step_size = 0.3;
    cfg.momentum = 0.9;
    cfg.seed = 77;
    cfg.B_clip = 0.05;
    cfg.op = {1.0};
    cfg.ensemble = {2.0, 2, 10.0};

    model::DeepONetModel a = small_frozen_model(4, 2, 2, 21);
    const std::vector<double> trunk_before = a.basis.params[0].data;
    model::DeepONetModel b = a;
    const train::TrainResult ra = train::train(a, cfg);
    const train::TrainResult rb = train::train(b, cfg);
    CHECK(ra.trace == rb.trace);
    CHECK(a.branch_params[0].data == b.branch_params[0].data);

    for (double v : a.branch_params[0].data) CHECK(std::abs(v) <= cfg.B_clip);
    CHECK(a.basis.params[0].data == trunk_before);
}

TEST_CASE("divergent training aborts with its trace", "[train]") {
    train::TrainConfig cfg;
    cfg.M = 2;
    cfg.P = 4;
    cfg.steps = 50;
    cfg.step_size = 1e30;
    cfg.seed = 99;
    cfg.B_clip = 1e300;
    cfg.op = {1.0};
    cfg.ensemble = {2.0, 2, 10.0};

    model::DeepONetModel m = small_frozen_model(4, 2, 2, 33);
    const train::TrainResult result = train::train(m, cfg);
    CHECK_FALSE(result.finished);
    CHECK(result.steps_run < cfg.steps);
    CHECK_FALSE(result.trace.empty());
    CHECK_FALSE(std::isfinite(result.trace.back()));
}

TEST_CASE("trainable trunks also descend", "[train]") {
    model::BranchRegime regime{1.0, 150, 8, 2};
    model::TrunkConfig cfg_t;
    cfg_t.mode = model::TrunkMode::trainable;
    cfg_t.dim = 1;
    cfg_t.width = 8;
    cfg_t.depth = 2;
    model::DeepONetModel m = model::build_deeponet(4, 2, regime, cfg_t, 55);
    const std::vector<double> trunk_before = m.trunk_params.data;

    train::TrainConfig cfg;
    cfg.M = 4;
    cfg.P = 16;
    cfg.steps = 120;
    cfg.step_size = 5e-3;
    cfg.seed = 31;
    cfg.B_clip = 10.0;
    cfg.op = {1.0};
    cfg.ensemble = {2.0, 2, 10.0};

    const train::TrainResult result = train::train(m, cfg);
    REQUIRE(result.finished);
    CHECK(result.trace.back() < result.trace.front());
    CHECK(m.trunk_params.data != trunk_before);
}

TEST_CASE("untrained models show no generalization gap", "[train]") {
    std::vector<double> gaps;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        train::TrainConfig cfg;
        cfg.M = 24;
        cfg.P = 64;
        cfg.seed = seed * 1337;
        cfg.op = {1.0};
        cfg.ensemble = {2.0, 2, 10.0};
        const model::DeepONetModel m = small_frozen_model(4, 2, 2, 1000 + seed);
        const train::GapReport report = train::generalization_gap(m, cfg, 40, 32);
        gaps.push_back(report.gap);
    }
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    const double sem = std::sqrt(ss / (gaps.size() - 1) / gaps.size());
    INFO("mean gap " << mean << " sem " << sem);
    CHECK(std::abs(mean) <= 3.5 * sem);
}

TEST_CASE("overfit models show a positive gap", "[train]") {
    int positive = 0;
    std::vector<double> small_m_gaps, large_m_gaps;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        train::TrainConfig cfg;
        cfg.M = 2;
        cfg.P = 6;
        cfg.steps = 600;
        cfg.step_size = 0.1;
        cfg.momentum = 0.9;
        cfg.seed = seed * 271;
        cfg.B_clip = 50.0;
        cfg.op = {1.0};
        cfg.ensemble = {2.0, 2, 10.0};
        model::DeepONetModel m = small_frozen_model(4, 2, 2, 2000 + seed);
        const train::TrainResult result = train::train(m, cfg);
        REQUIRE(result.finished);
        const train::GapReport report = train::generalization_gap(m, cfg, 40, 32);
        if (report.gap > 0.0) ++positive;
        if (seed <= 6) small_m_gaps.push_back(report.gap);
    }
    INFO("positive gaps " << positive << "/20");
    CHECK(positive >= 16);

    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        train::TrainConfig cfg;
        cfg.M = 32;
        cfg.P = 6;
        cfg.steps = 600;
        cfg.step_size = 0.1;
        cfg.momentum = 0.9;
        cfg.seed = seed * 271;
        cfg.B_clip = 50.0;
        cfg.op = {1.0};
        cfg.ensemble = {2.0, 2, 10.0};
        model::DeepONetModel m = small_frozen_model(4, 2, 2, 2000 + seed);
        const train::TrainResult result = train::train(m, cfg);
        REQUIRE(result.finished);
        large_m_gaps.push_back(train::generalization_gap(m, cfg, 40, 32).gap);
    }
    INFO("median gap M=2 " << median_of(small_m_gaps) << " M=32 " << median_of(large_m_gaps));
    CHECK(median_of(large_m_gaps) < median_of(small_m_gaps));
}

TEST_CASE("envelope formula evaluates and degrades correctly", "[train]") {
    const train::BoundEnvelope env{1.0, 1.0, 1.0, 10};
    const double M = std::exp(2.0), P = std::exp(2.0);
    const double want = std::pow(11.0, 2.5) / std::exp(1.0) + 10.0 * std::sqrt(2.0) / std::exp(1.0);
    CHECK(testutil::rel_err(train::theoretical_envelope(env, M, P), want, 1e-12) <= 1e-12);

    const train::BoundEnvelope flat{0.0, 1.0, 2.0, 3};
    const double m0 = 100.0, p0 = 50.0;
    const double direct = std::sqrt(1.0 + 3.0 * std::log(2.0 * std::sqrt(m0))) / std::sqrt(m0) +
                          3.0 * std::sqrt(std::log(p0)) / std::sqrt(p0);
    CHECK(testutil::rel_err(train::theoretical_envelope(flat, m0, p0), direct, 1e-12) <= 1e-12);

    for (double m2 = 200.0; m2 <= 51200.0; m2 *= 2.0)
        CHECK(train::theoretical_envelope(env, 2.0 * m2, 1e4) <
              train::theoretical_envelope(env, m2, 1e4));
    for (double p2 = 8.0; p2 <= 8192.0; p2 *= 2.0)
        CHECK(train::theoretical_envelope(env, 1e4, 2.0 * p2) <
              train::theoretical_envelope(env, 1e4, p2));

    CHECK_THROWS_AS(train::theoretical_envelope(env, 1.0, 100.0), std::domain_error);
    CHECK_THROWS_AS(train::theoretical_envelope({1.0, 1.0, 0.1, 10}, 25.0, 100.0), std::domain_error);
    CHECK_THROWS_AS(train::theoretical_envelope({1.0, 0.0, 1.0, 10}, 100.0, 100.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(train::theoretical_envelope({1.0, 1.0, 1.0, 0}, 100.0, 100.0),
                    std::invalid_argument);
}
