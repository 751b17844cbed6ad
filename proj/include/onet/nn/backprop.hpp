#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/nn/jet.hpp"

namespace onet::nn {

// Gradient with respect to every parameter of sum_o out_weights[o] * output_o(x).
[[nodiscard]] inline std::vector<double> backprop_value(const NetworkSpec& spec, const ParameterVector& pv,
                                                        const std::vector<double>& x,
                                                        const std::vector<double>& out_weights) {
    if (static_cast<int>(out_weights.size()) != spec.output_dim)
        throw std::invalid_argument("backprop_value: seed size mismatch");
    detail::ValueTape tape;
    detail::run_forward(spec, pv, x, &tape);

    std::vector<double> grad(pv.layout.total, 0.0);
    std::vector<double> adj = out_weights;
    for (int i = spec.num_affine() - 1; i >= 0; --i) {
        const int rows = spec.rows(i);
        const int cols = spec.cols(i);
        const std::vector<double>& in = tape.inputs[static_cast<std::size_t>(i)];
        if (i < spec.depth()) {
            const ActivationKind k = spec.hidden[static_cast<std::size_t>(i)].activation;
            const std::vector<double>& pre = tape.pre[static_cast<std::size_t>(i)];
            for (int r = 0; r < rows; ++r)
                adj[static_cast<std::size_t>(r)] *= act_d1(k, pre[static_cast<std::size_t>(r)]);
        }
        for (int r = 0; r < rows; ++r) {
            const double a = adj[static_cast<std::size_t>(r)];
            grad[pv.layout.b_index(i, r)] += a;
            for (int c = 0; c < cols; ++c)
                grad[pv.layout.w_index(i, r, c)] += a * in[static_cast<std::size_t>(c)];
        }
        if (i > 0) {
            std::vector<double> prev(static_cast<std::size_t>(cols), 0.0);
            for (int c = 0; c < cols; ++c) {
                double s = 0.0;
                for (int r = 0; r < rows; ++r) s += pv.w(i, r, c) * adj[static_cast<std::size_t>(r)];
                prev[static_cast<std::size_t>(c)] = s;
            }
            adj = std::move(prev);
        }
    }
    return grad;
}

// Linear functional of one output's jet: w_value * value + w_gradient . gradient
// + w_laplacian * laplacian.
struct JetSeed {
    double w_value = 0.0;
    std::vector<double> w_gradient;
    double w_laplacian = 0.0;
};

// Gradient with respect to every parameter of sum_o <seed_o, jet of output o>,
// computed by reverse sweep over the laplacian-mode jet graph.
[[nodiscard]] inline std::vector<double> backprop_jet(const NetworkSpec& spec, const ParameterVector& pv,
                                                      const std::vector<double>& x,
                                                      const std::vector<JetSeed>& seeds) {
    if (static_cast<int>(seeds.size()) != spec.output_dim)
        throw std::invalid_argument("backprop_jet: seed count mismatch");
    const int d = spec.input_dim;
    detail::JetTape tape;
    detail::run_jet_forward(spec, pv, x, JetMode::laplacian, &tape);

    std::vector<double> grad(pv.layout.total, 0.0);

    // adjoints of (v, g, lap) on the current block output, node-major
    const int out = spec.output_dim;
    std::vector<double> av(static_cast<std::size_t>(out), 0.0);
    std::vector<double> ag(static_cast<std::size_t>(out) * static_cast<std::size_t>(d), 0.0);
    std::vector<double> al(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
        const JetSeed& s = seeds[static_cast<std::size_t>(o)];
        if (static_cast<int>(s.w_gradient.size()) != d && !s.w_gradient.empty())
            throw std::invalid_argument("backprop_jet: seed gradient size mismatch");
        av[static_cast<std::size_t>(o)] = s.w_value;
        for (int l = 0; l < d && !s.w_gradient.empty(); ++l)
            ag[static_cast<std::size_t>(o * d + l)] = s.w_gradient[static_cast<std::size_t>(l)];
        al[static_cast<std::size_t>(o)] = s.w_laplacian;
    }

    for (int i = spec.num_affine() - 1; i >= 0; --i) {
        const int rows = spec.rows(i);
        const int cols = spec.cols(i);
        const detail::JetLayer& in = tape.inputs[static_cast<std::size_t>(i)];
        const detail::JetLayer& pre = tape.pre[static_cast<std::size_t>(i)];

        if (i < spec.depth()) {
            // reverse the activation jet map: v~ = act(v), g~ = p1 g, l~ = p1 l + p2 |g|^2
            const ActivationKind k = spec.hidden[static_cast<std::size_t>(i)].activation;
            for (int r = 0; r < rows; ++r) {
                const double hv = pre.v[static_cast<std::size_t>(r)];
                const double p1 = act_d1(k, hv);
                const double p2 = act_d2(k, hv);
                const double avr = av[static_cast<std::size_t>(r)];
                const double alr = al[static_cast<std::size_t>(r)];
                double gdot = 0.0;
                for (int l = 0; l < d; ++l)
                    gdot += ag[static_cast<std::size_t>(r * d + l)] * pre.g[static_cast<std::size_t>(r * d + l)];
                av[static_cast<std::size_t>(r)] =
                    avr * p1 + gdot * p2 + alr * p2 * pre.lap[static_cast<std::size_t>(r)];
                for (int l = 0; l < d; ++l) {
                    const std::size_t idx = static_cast<std::size_t>(r * d + l);
                    ag[idx] = ag[idx] * p1 + alr * 2.0 * p2 * pre.g[idx];
                }
                al[static_cast<std::size_t>(r)] = alr * p1;
            }
        }

        for (int r = 0; r < rows; ++r) {
            const double avr = av[static_cast<std::size_t>(r)];
            const double alr = al[static_cast<std::size_t>(r)];
            grad[pv.layout.b_index(i, r)] += avr;
            for (int c = 0; c < cols; ++c) {
                double gw = avr * in.v[static_cast<std::size_t>(c)];
                for (int l = 0; l < d; ++l)
                    gw += ag[static_cast<std::size_t>(r * d + l)] * in.g[static_cast<std::size_t>(c * d + l)];
                gw += alr * in.lap[static_cast<std::size_t>(c)];
                grad[pv.layout.w_index(i, r, c)] += gw;
            }
        }

        if (i > 0) {
            std::vector<double> pav(static_cast<std::size_t>(cols), 0.0);
            std::vector<double> pag(static_cast<std::size_t>(cols) * static_cast<std::size_t>(d), 0.0);
            std::vector<double> pal(static_cast<std::size_t>(cols), 0.0);
            for (int c = 0; c < cols; ++c) {
                double sv = 0.0, sl = 0.0;
                for (int r = 0; r < rows; ++r) {
                    const double w = pv.w(i, r, c);
                    sv += w * av[static_cast<std::size_t>(r)];
                    sl += w * al[static_cast<std::size_t>(r)];
                }
                pav[static_cast<std::size_t>(c)] = sv;
                pal[static_cast<std::size_t>(c)] = sl;
                for (int l = 0; l < d; ++l) {
                    double sg = 0.0;
                    for (int r = 0; r < rows; ++r)
                        sg += pv.w(i, r, c) * ag[static_cast<std::size_t>(r * d + l)];
                    pag[static_cast<std::size_t>(c * d + l)] = sg;
                }
            }
            av = std::move(pav);
            ag = std::move(pag);
            al = std::move(pal);
        }
    }
    return grad;
}

}  // namespace onet::nn
