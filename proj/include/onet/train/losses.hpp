#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "onet/math/rng.hpp"
#include "onet/model/deeponet.hpp"
#include "onet/pde/truth_operator.hpp"
#include "onet/spectral/fourier_field.hpp"
#include "onet/spectral/grid_sample.hpp"
#include "onet/spectral/random_field.hpp"

namespace onet::train {

// Input-function ensemble the trainer draws from.
struct EnsembleConfig {
    double s = 2.0;
    int K_f = 2;
    double M_bound = 10.0;

    void validate() const {
        if (!(s > 0.0)) throw std::invalid_argument("EnsembleConfig: smoothness must be positive");
        if (K_f < 0) throw std::invalid_argument("EnsembleConfig: mode cutoff must be nonnegative");
        if (!(M_bound > 0.0)) throw std::invalid_argument("EnsembleConfig: norm bound must be positive");
    }
};

struct TrainConfig {
    int M = 8;
    int P = 32;
    int steps = 100;
    double step_size = 1e-2;
    double momentum = 0.0;
    std::uint64_t seed = 0;
    double B_clip = 10.0;
    pde::OperatorSpec op;
    EnsembleConfig ensemble;

    void validate() const {
        if (M < 1 || P < 1 || steps < 1)
            throw std::invalid_argument("TrainConfig: M, P and steps must be at least 1");
        if (!(step_size > 0.0)) throw std::invalid_argument("TrainConfig: step size must be positive");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
        if (!(B_clip > 0.0)) throw std::invalid_argument("TrainConfig: clip bound must be positive");
        op.validate();
        ensemble.validate();
    }
};

// A drawn input function together with its sensor encoding.
struct FieldSample {
    spectral::FourierField field;
    spectral::GridSample grid;
};

struct TrainingSet {
    std::vector<FieldSample> fs;
    std::vector<std::vector<double>> ys;
};

[[nodiscard]] inline FieldSample draw_field(std::uint64_t seed, int dim, int enc_n,
                                            const EnsembleConfig& ens) {
    spectral::FourierField f = spectral::sample_random_field(seed, dim, ens.s, ens.K_f, ens.M_bound);
    spectral::GridSample g = spectral::encode_D(f, enc_n);
    return {std::move(f), std::move(g)};
}

[[nodiscard]] inline TrainingSet draw_training_set(const TrainConfig& cfg, int dim, int enc_n) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    TrainingSet set;
    set.fs.reserve(static_cast<std::size_t>(cfg.M));
    for (int i = 0; i < cfg.M; ++i) set.fs.push_back(draw_field(rng(), dim, enc_n, cfg.ensemble));
    set.ys.reserve(static_cast<std::size_t>(cfg.P));
    for (int j = 0; j < cfg.P; ++j) {
        std::vector<double> y(static_cast<std::size_t>(dim));
        for (double& c : y) c = math::uniform_unit(rng);
        set.ys.push_back(std::move(y));
    }
    return set;
}

namespace detail {

// tau[k*P + j] = c t_k(y_j) - lap t_k(y_j): the trunk side of the residual.
inline void fill_tau(const model::DeepONetModel& m, const pde::OperatorSpec& op,
                     const std::vector<std::vector<double>>& ys, std::vector<double>& tau) {
    const std::size_t P = ys.size();
    tau.assign(static_cast<std::size_t>(m.p) * P, 0.0);
    for (std::size_t j = 0; j < P; ++j) {
        const std::vector<nn::Jet2> jets = model::trunk_jets(m, ys[j]);
        for (int k = 0; k < m.p; ++k)
            tau[static_cast<std::size_t>(k) * P + j] =
                op.c * jets[static_cast<std::size_t>(k)].value - jets[static_cast<std::size_t>(k)].laplacian;
    }
}

}  // namespace detail

// Empirical Sobolev residual loss: mean over sampled (f, y) pairs of
// |c G(f)(y) - lap G(f)(y) - f(y)|^2.
template <class ModelT>
[[nodiscard]] double loss_LS(const ModelT& m, const pde::OperatorSpec& op,
                             const std::vector<FieldSample>& fs,
                             const std::vector<std::vector<double>>& ys) {
    if (fs.empty() || ys.empty()) throw std::invalid_argument("loss_LS: empty sample");
    double acc = 0.0;
    for (const FieldSample& f : fs) {
        for (const std::vector<double>& y : ys) {
            const nn::Jet2 jet = eval_model_jet(m, f.grid, y);
            const double r = op.c * jet.value - jet.laplacian - f.field.evaluate(y);
            acc += r * r;
        }
    }
    return acc / (static_cast<double>(fs.size()) * static_cast<double>(ys.size()));
}

// Factored overload: one trunk jet pass over the collocation points instead
// of one per (field, point) pair.
[[nodiscard]] inline double loss_LS(const model::DeepONetModel& m, const pde::OperatorSpec& op,
                                    const std::vector<FieldSample>& fs,
                                    const std::vector<std::vector<double>>& ys) {
    if (fs.empty() || ys.empty()) throw std::invalid_argument("loss_LS: empty sample");
    const std::size_t M = fs.size();
    const std::size_t P = ys.size();
    const std::size_t p = static_cast<std::size_t>(m.p);
    std::vector<double> tau;
    detail::fill_tau(m, op, ys, tau);
    double loss = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const std::vector<double> b = model::branch_outputs(m, fs[i].grid);
        for (std::size_t j = 0; j < P; ++j) {
            double r = -fs[i].field.evaluate(ys[j]);
            for (std::size_t k = 0; k < p; ++k) r += b[k] * tau[k * P + j];
            loss += r * r;
        }
    }
    return loss / (static_cast<double>(M) * static_cast<double>(P));
}

namespace detail {

[[nodiscard]] inline std::vector<std::vector<double>> midpoint_grid(int dim, int quad_res) {
    std::vector<std::vector<double>> ys;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> y(static_cast<std::size_t>(dim));
    while (true) {
        for (int a = 0; a < dim; ++a)
            y[static_cast<std::size_t>(a)] = (idx[static_cast<std::size_t>(a)] + 0.5) / quad_res;
        ys.push_back(y);
        int a = dim - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == quad_res) idx[static_cast<std::size_t>(a--)] = 0;
        if (a < 0) break;
    }
    return ys;
}

[[nodiscard]] inline double quad_residual_one_field(const model::DeepONetModel& m,
                                                    const FieldSample& f,
                                                    const std::vector<double>& tau,
                                                    const std::vector<std::vector<double>>& ys,
                                                    double weight) {
    const std::vector<double> b = model::branch_outputs(m, f.grid);
    const std::size_t P = ys.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
        double r = -f.field.evaluate(ys[j]);
        for (std::size_t k = 0; k < b.size(); ++k) r += b[k] * tau[k * P + j];
        acc += weight * r * r;
    }
    return acc;
}

}  // namespace detail

// Same residual with the collocation average replaced by tensor midpoint
// quadrature over the domain.
template <class ModelT>
[[nodiscard]] double loss_LM(const ModelT& m, const pde::OperatorSpec& op,
                             const std::vector<FieldSample>& fs, int quad_res) {
    if (fs.empty()) throw std::invalid_argument("loss_LM: empty sample");
    if (quad_res < 1) throw std::invalid_argument("loss_LM: quadrature resolution must be positive");
    const int dim = m.dim;
    double weight = 1.0;
    for (int a = 0; a < dim; ++a) weight /= quad_res;

    double acc = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> y(static_cast<std::size_t>(dim));
    for (const FieldSample& f : fs) {
        idx.assign(idx.size(), 0);
        while (true) {
            for (int a = 0; a < dim; ++a) y[static_cast<std::size_t>(a)] = (idx[static_cast<std::size_t>(a)] + 0.5) / quad_res;
            const nn::Jet2 jet = eval_model_jet(m, f.grid, y);
            const double r = op.c * jet.value - jet.laplacian - f.field.evaluate(y);
            acc += weight * r * r;
            int a = dim - 1;
            while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == quad_res) idx[static_cast<std::size_t>(a--)] = 0;
            if (a < 0) break;
        }
    }
    return acc / static_cast<double>(fs.size());
}

// Factored overload: the trunk tables over the quadrature grid are shared by
// every field.
[[nodiscard]] inline double loss_LM(const model::DeepONetModel& m, const pde::OperatorSpec& op,
                                    const std::vector<FieldSample>& fs, int quad_res) {
    if (fs.empty()) throw std::invalid_argument("loss_LM: empty sample");
    if (quad_res < 1) throw std::invalid_argument("loss_LM: quadrature resolution must be positive");
    const std::vector<std::vector<double>> ys = detail::midpoint_grid(m.dim, quad_res);
    std::vector<double> tau;
    detail::fill_tau(m, op, ys, tau);
    double weight = 1.0;
    for (int a = 0; a < m.dim; ++a) weight /= quad_res;
    double acc = 0.0;
    for (const FieldSample& f : fs) acc += detail::quad_residual_one_field(m, f, tau, ys, weight);
    return acc / static_cast<double>(fs.size());
}

struct LossEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
};

// Monte-Carlo estimate of the expected residual integral over fresh
// ensemble draws.
template <class ModelT>
[[nodiscard]] LossEstimate loss_LD(const ModelT& m, const pde::OperatorSpec& op,
                                   const EnsembleConfig& ens, int n_fresh, int quad_res,
                                   std::uint64_t seed) {
    if (n_fresh < 1) throw std::invalid_argument("loss_LD: need at least one draw");
    ens.validate();
    std::mt19937_64 rng(seed);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(n_fresh));
    for (int t = 0; t < n_fresh; ++t) {
        const FieldSample f = draw_field(rng(), m.dim, m.enc_n, ens);
        vals.push_back(loss_LM(m, op, {f}, quad_res));
    }
    LossEstimate est;
    est.n = n_fresh;
    for (double v : vals) est.mean += v;
    est.mean /= n_fresh;
    if (n_fresh > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(ss / (n_fresh - 1) / n_fresh);
    }
    return est;
}

// Factored overload: trunk tables on the quadrature grid are computed once
// and reused across all fresh draws, so large n_fresh stays cheap.
[[nodiscard]] inline LossEstimate loss_LD(const model::DeepONetModel& m, const pde::OperatorSpec& op,
                                          const EnsembleConfig& ens, int n_fresh, int quad_res,
                                          std::uint64_t seed) {
    if (n_fresh < 1) throw std::invalid_argument("loss_LD: need at least one draw");
    if (quad_res < 1) throw std::invalid_argument("loss_LD: quadrature resolution must be positive");
    ens.validate();
    const std::vector<std::vector<double>> ys = detail::midpoint_grid(m.dim, quad_res);
    std::vector<double> tau;
    detail::fill_tau(m, op, ys, tau);
    double weight = 1.0;
    for (int a = 0; a < m.dim; ++a) weight /= quad_res;

    std::mt19937_64 rng(seed);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(n_fresh));
    for (int t = 0; t < n_fresh; ++t) {
        const FieldSample f = draw_field(rng(), m.dim, m.enc_n, ens);
        vals.push_back(detail::quad_residual_one_field(m, f, tau, ys, weight));
    }
    LossEstimate est;
    est.n = n_fresh;
    for (double v : vals) est.mean += v;
    est.mean /= n_fresh;
    if (n_fresh > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(ss / (n_fresh - 1) / n_fresh);
    }
    return est;
}

}  // namespace onet::train
