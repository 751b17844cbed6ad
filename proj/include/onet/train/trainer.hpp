#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onet/model/deeponet.hpp"
#include "onet/nn/backprop.hpp"
#include "onet/train/losses.hpp"

namespace onet::train {

namespace detail {

// Loss and full parameter gradient given the precomputed trunk factors and
// target values F[i*P + j] = f_i(y_j). Gradient blocks follow the branch
// parameter vectors in order, then the trunk block when it is trainable.
inline std::pair<double, std::vector<double>> ls_grad_with_tables(
    const model::DeepONetModel& m, const pde::OperatorSpec& op, const std::vector<FieldSample>& fs,
    const std::vector<std::vector<double>>& ys, const std::vector<double>& tau,
    const std::vector<double>& F) {
    const std::size_t M = fs.size();
    const std::size_t P = ys.size();
    const std::size_t p = static_cast<std::size_t>(m.p);
    const double scale = 2.0 / (static_cast<double>(M) * static_cast<double>(P));

    std::vector<double> b(M * p);
    for (std::size_t i = 0; i < M; ++i) {
        const std::vector<double> bi = model::branch_outputs(m, fs[i].grid);
        for (std::size_t k = 0; k < p; ++k) b[i * p + k] = bi[k];
    }

    double loss = 0.0;
    std::vector<double> r(M * P);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < P; ++j) {
            double g = -F[i * P + j];
            for (std::size_t k = 0; k < p; ++k) g += b[i * p + k] * tau[k * P + j];
            r[i * P + j] = g;
            loss += g * g;
        }
    }
    loss /= static_cast<double>(M) * static_cast<double>(P);

    const bool trainable_trunk = m.trunk_cfg.mode == model::TrunkMode::trainable;
    const std::size_t branch_block = m.branch_params[0].data.size();
    const std::size_t total =
        branch_block * m.branch_params.size() + (trainable_trunk ? m.trunk_params.data.size() : 0);
    std::vector<double> grad(total, 0.0);

    std::vector<double> seeds(p);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < P; ++j) s += r[i * P + j] * tau[k * P + j];
            seeds[k] = scale * s;
        }
        if (m.sharing == model::BranchSharing::shared) {
            const std::vector<double> gi =
                nn::backprop_value(m.branch_spec, m.branch_params[0], fs[i].grid.values, seeds);
            for (std::size_t t = 0; t < branch_block; ++t) grad[t] += gi[t];
        } else {
            for (std::size_t k = 0; k < p; ++k) {
                const std::vector<double> gi = nn::backprop_value(
                    m.branch_spec, m.branch_params[k], fs[i].grid.values, {seeds[k]});
                for (std::size_t t = 0; t < branch_block; ++t) grad[k * branch_block + t] += gi[t];
            }
        }
    }

    if (trainable_trunk) {
        const std::size_t off = branch_block * m.branch_params.size();
        std::vector<nn::JetSeed> jet_seeds(p);
        for (std::size_t j = 0; j < P; ++j) {
            for (std::size_t k = 0; k < p; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < M; ++i) s += r[i * P + j] * b[i * p + k];
                jet_seeds[k].w_value = scale * op.c * s;
                jet_seeds[k].w_laplacian = -scale * s;
            }
            const std::vector<double> gj = nn::backprop_jet(m.trunk_spec, m.trunk_params, ys[j], jet_seeds);
            for (std::size_t t = 0; t < gj.size(); ++t) grad[off + t] += gj[t];
        }
    }
    return {loss, std::move(grad)};
}

}  // namespace detail

// Loss and gradient of loss_LS with respect to every trainable parameter.
[[nodiscard]] inline std::pair<double, std::vector<double>> loss_LS_grad(
    const model::DeepONetModel& m, const pde::OperatorSpec& op, const std::vector<FieldSample>& fs,
    const std::vector<std::vector<double>>& ys) {
    if (fs.empty() || ys.empty()) throw std::invalid_argument("loss_LS_grad: empty sample");
    std::vector<double> tau;
    detail::fill_tau(m, op, ys, tau);
    std::vector<double> F(fs.size() * ys.size());
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = 0; j < ys.size(); ++j) F[i * ys.size() + j] = fs[i].field.evaluate(ys[j]);
    return detail::ls_grad_with_tables(m, op, fs, ys, tau, F);
}

struct TrainResult {
    std::vector<double> trace;
    bool finished = true;
    int steps_run = 0;
};

// Full-batch gradient descent on loss_LS with optional heavy-ball momentum;
// every trainable parameter is clamped to [-B_clip, B_clip] after each step.
inline TrainResult train(model::DeepONetModel& m, const TrainConfig& cfg) {
    cfg.validate();
    const TrainingSet set = draw_training_set(cfg, m.dim, m.enc_n);

    std::vector<double> F(set.fs.size() * set.ys.size());
    for (std::size_t i = 0; i < set.fs.size(); ++i)
        for (std::size_t j = 0; j < set.ys.size(); ++j)
            F[i * set.ys.size() + j] = set.fs[i].field.evaluate(set.ys[j]);

    const bool trainable_trunk = m.trunk_cfg.mode == model::TrunkMode::trainable;
    std::vector<double> tau;
    if (!trainable_trunk) detail::fill_tau(m, cfg.op, set.ys, tau);

    std::vector<double*> slots;
    for (auto& pv : m.branch_params)
        for (double& v : pv.data) slots.push_back(&v);
    if (trainable_trunk)
        for (double& v : m.trunk_params.data) slots.push_back(&v);

    TrainResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.steps) + 1);
    std::vector<double> velocity(slots.size(), 0.0);
    for (int step = 0; step < cfg.steps; ++step) {
        if (trainable_trunk) detail::fill_tau(m, cfg.op, set.ys, tau);
        const auto [loss, grad] = detail::ls_grad_with_tables(m, cfg.op, set.fs, set.ys, tau, F);
        result.trace.push_back(loss);
        if (!std::isfinite(loss)) {
            result.finished = false;
            return result;
        }
        for (std::size_t t = 0; t < slots.size(); ++t) {
            velocity[t] = cfg.momentum * velocity[t] - cfg.step_size * grad[t];
            double v = *slots[t] + velocity[t];
            if (v > cfg.B_clip) v = cfg.B_clip;
            if (v < -cfg.B_clip) v = -cfg.B_clip;
            *slots[t] = v;
        }
        ++result.steps_run;
    }
    if (trainable_trunk) detail::fill_tau(m, cfg.op, set.ys, tau);
    const auto [final_loss, final_grad] = detail::ls_grad_with_tables(m, cfg.op, set.fs, set.ys, tau, F);
    result.trace.push_back(final_loss);
    if (!std::isfinite(final_loss)) result.finished = false;
    return result;
}

}  // namespace onet::train
