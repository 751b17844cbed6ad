#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/nn/forward.hpp"
#include "onet/nn/network.hpp"

namespace onet::nn {

// Second-order jet of one network output at a point: value, gradient, and
// either the Laplacian alone (laplacian mode) or the full Hessian (full mode,
// row-major, input_dim <= 3). laplacian is filled in both modes.
enum class JetMode { laplacian, full };

struct Jet2 {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> hessian;
    double laplacian = 0.0;
    JetMode mode = JetMode::laplacian;
};

namespace detail {

// Per-node jet state for a whole layer, node-major.
struct JetLayer {
    std::vector<double> v;    // width
    std::vector<double> g;    // width * d
    std::vector<double> lap;  // width
    std::vector<double> hess; // width * d * d, full mode only
};

struct JetTape {
    std::vector<JetLayer> inputs;  // jets feeding affine i
    std::vector<JetLayer> pre;     // pre-activation jets of affine i
};

inline void require_jet_capable(const NetworkSpec& spec, JetMode mode) {
    if (spec.has_nonsmooth_hidden())
        throw std::invalid_argument("forward_jet2: nonsmooth trunk (relu hidden layer has no second-order jet)");
    if (mode == JetMode::full && spec.input_dim > 3)
        throw std::invalid_argument("forward_jet2: full hessian mode supports input_dim <= 3");
}

inline JetLayer run_jet_forward(const NetworkSpec& spec, const ParameterVector& pv,
                                const std::vector<double>& x, JetMode mode, JetTape* tape) {
    require_jet_capable(spec, mode);
    if (static_cast<int>(x.size()) != spec.input_dim)
        throw std::invalid_argument("forward_jet2: input size mismatch");
    const int d = spec.input_dim;
    const bool full = mode == JetMode::full;
    const int n_aff = spec.num_affine();

    JetLayer cur;
    cur.v = x;
    cur.g.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) cur.g[static_cast<std::size_t>(j * d + j)] = 1.0;
    cur.lap.assign(static_cast<std::size_t>(d), 0.0);
    if (full) cur.hess.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d * d), 0.0);

    if (tape) {
        tape->inputs.assign(static_cast<std::size_t>(n_aff), {});
        tape->pre.assign(static_cast<std::size_t>(n_aff), {});
    }

    for (int i = 0; i < n_aff; ++i) {
        const int rows = spec.rows(i);
        const int cols = spec.cols(i);
        if (tape) tape->inputs[static_cast<std::size_t>(i)] = cur;

        JetLayer h;
        h.v.assign(static_cast<std::size_t>(rows), 0.0);
        h.g.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(d), 0.0);
        h.lap.assign(static_cast<std::size_t>(rows), 0.0);
        if (full) h.hess.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(d * d), 0.0);

        for (int r = 0; r < rows; ++r) {
            double acc = pv.b(i, r);
            for (int c = 0; c < cols; ++c) acc += pv.w(i, r, c) * cur.v[static_cast<std::size_t>(c)];
            h.v[static_cast<std::size_t>(r)] = acc;
            for (int l = 0; l < d; ++l) {
                double ag = 0.0;
                for (int c = 0; c < cols; ++c)
                    ag += pv.w(i, r, c) * cur.g[static_cast<std::size_t>(c * d + l)];
                h.g[static_cast<std::size_t>(r * d + l)] = ag;
            }
            double al = 0.0;
            for (int c = 0; c < cols; ++c) al += pv.w(i, r, c) * cur.lap[static_cast<std::size_t>(c)];
            h.lap[static_cast<std::size_t>(r)] = al;
            if (full) {
                for (int l = 0; l < d * d; ++l) {
                    double ah = 0.0;
                    for (int c = 0; c < cols; ++c)
                        ah += pv.w(i, r, c) * cur.hess[static_cast<std::size_t>(c * d * d + l)];
                    h.hess[static_cast<std::size_t>(r * d * d + l)] = ah;
                }
            }
        }
        if (tape) tape->pre[static_cast<std::size_t>(i)] = h;

        if (i < spec.depth()) {
            const ActivationKind k = spec.hidden[static_cast<std::size_t>(i)].activation;
            for (int r = 0; r < rows; ++r) {
                const double hv = h.v[static_cast<std::size_t>(r)];
                const double p1 = act_d1(k, hv);
                const double p2 = act_d2(k, hv);
                double gsq = 0.0;
                for (int l = 0; l < d; ++l) {
                    const double gl = h.g[static_cast<std::size_t>(r * d + l)];
                    gsq += gl * gl;
                }
                if (full) {
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b) {
                            const std::size_t idx = static_cast<std::size_t>(r * d * d + a * d + b);
                            h.hess[idx] = p1 * h.hess[idx] +
                                          p2 * h.g[static_cast<std::size_t>(r * d + a)] *
                                              h.g[static_cast<std::size_t>(r * d + b)];
                        }
                }
                h.lap[static_cast<std::size_t>(r)] = p1 * h.lap[static_cast<std::size_t>(r)] + p2 * gsq;
                for (int l = 0; l < d; ++l) h.g[static_cast<std::size_t>(r * d + l)] *= p1;
                h.v[static_cast<std::size_t>(r)] = act(k, hv);
            }
        }
        cur = std::move(h);
    }
    return cur;
}

}  // namespace detail

[[nodiscard]] inline std::vector<Jet2> forward_jet2(const NetworkSpec& spec, const ParameterVector& pv,
                                                    const std::vector<double>& x,
                                                    JetMode mode = JetMode::laplacian) {
    const int d = spec.input_dim;
    detail::JetLayer out = detail::run_jet_forward(spec, pv, x, mode, nullptr);
    std::vector<Jet2> jets(static_cast<std::size_t>(spec.output_dim));
    for (int o = 0; o < spec.output_dim; ++o) {
        Jet2& j = jets[static_cast<std::size_t>(o)];
        j.mode = mode;
        j.value = out.v[static_cast<std::size_t>(o)];
        j.gradient.assign(out.g.begin() + o * d, out.g.begin() + (o + 1) * d);
        if (mode == JetMode::full) {
            j.hessian.assign(out.hess.begin() + o * d * d, out.hess.begin() + (o + 1) * d * d);
            double tr = 0.0;
            for (int l = 0; l < d; ++l) tr += j.hessian[static_cast<std::size_t>(l * d + l)];
            j.laplacian = tr;
        } else {
            j.laplacian = out.lap[static_cast<std::size_t>(o)];
        }
    }
    return jets;
}

}  // namespace onet::nn
