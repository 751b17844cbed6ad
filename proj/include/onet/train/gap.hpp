#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "onet/model/deeponet.hpp"
#include "onet/train/losses.hpp"

namespace onet::train {

struct GapReport {
    double L_S_val = 0.0;
    double L_D_est = 0.0;
    double gap = 0.0;
    double std_error = 0.0;
};

// Empirical loss on the configured training sample against a fresh-draw
// estimate of the expected loss; gap = L_D_est - L_S_val.
[[nodiscard]] inline GapReport generalization_gap(const model::DeepONetModel& m, const TrainConfig& cfg,
                                                  int n_fresh, int quad_res = 33) {
    const TrainingSet set = draw_training_set(cfg, m.dim, m.enc_n);
    GapReport report;
    report.L_S_val = loss_LS(m, cfg.op, set.fs, set.ys);
    const LossEstimate est =
        loss_LD(m, cfg.op, cfg.ensemble, n_fresh, quad_res, cfg.seed ^ 0x94d049bb133111ebULL);
    report.L_D_est = est.mean;
    report.gap = est.mean - report.L_S_val;
    report.std_error = est.std_error;
    return report;
}

struct BoundEnvelope {
    double kappa = 1.0;
    double C_env = 1.0;
    double B = 1.0;
    long long d_theta = 1;
};

// (1 + d_theta log(B sqrt(M)))^(2 kappa + 1/2) / sqrt(M) + d_theta sqrt(log P) / sqrt(P),
// scaled by C_env. Natural logarithms throughout.
[[nodiscard]] inline double theoretical_envelope(const BoundEnvelope& env, double M, double P) {
    if (!(env.kappa >= 0.0) || !(env.C_env > 0.0) || !(env.B > 0.0) || env.d_theta < 1)
        throw std::invalid_argument("theoretical_envelope: envelope constants must be positive");
    if (!(M >= 1.0) || !(P >= 1.0))
        throw std::invalid_argument("theoretical_envelope: sample counts must be at least 1");
    const double bm = env.B * std::sqrt(M);
    if (bm <= 1.0) throw std::domain_error("theoretical_envelope: out of regime, B sqrt(M) must exceed 1");
    const double sample_term =
        std::pow(1.0 + static_cast<double>(env.d_theta) * std::log(bm), 2.0 * env.kappa + 0.5) /
        std::sqrt(M);
    const double colloc_term = static_cast<double>(env.d_theta) * std::sqrt(std::log(P)) / std::sqrt(P);
    return env.C_env * (sample_term + colloc_term);
}

}  // namespace onet::train
