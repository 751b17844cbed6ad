#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "onet/nn/network.hpp"

namespace onet::nn {

namespace detail {

// Post-activation values entering each affine map, plus pre-activations;
// kept around so the reverse passes can replay the graph.
struct ValueTape {
    std::vector<std::vector<double>> inputs;   // inputs[i]: values feeding affine i
    std::vector<std::vector<double>> pre;      // pre[i]: pre-activations of affine i
};

inline std::vector<double> run_forward(const NetworkSpec& spec, const ParameterVector& pv,
                                       const std::vector<double>& x, ValueTape* tape) {
    if (static_cast<int>(x.size()) != spec.input_dim)
        throw std::invalid_argument("forward: input size mismatch");
    std::vector<double> cur = x;
    const int n_aff = spec.num_affine();
    if (tape) {
        tape->inputs.assign(static_cast<std::size_t>(n_aff), {});
        tape->pre.assign(static_cast<std::size_t>(n_aff), {});
    }
    for (int i = 0; i < n_aff; ++i) {
        const int rows = spec.rows(i);
        const int cols = spec.cols(i);
        if (tape) tape->inputs[static_cast<std::size_t>(i)] = cur;
        std::vector<double> h(static_cast<std::size_t>(rows));
        for (int r = 0; r < rows; ++r) {
            double acc = pv.b(i, r);
            for (int c = 0; c < cols; ++c) acc += pv.w(i, r, c) * cur[static_cast<std::size_t>(c)];
            h[static_cast<std::size_t>(r)] = acc;
        }
        if (tape) tape->pre[static_cast<std::size_t>(i)] = h;
        if (i < spec.depth()) {
            const ActivationKind k = spec.hidden[static_cast<std::size_t>(i)].activation;
            for (int r = 0; r < rows; ++r)
                h[static_cast<std::size_t>(r)] = act(k, h[static_cast<std::size_t>(r)]);
        }
        cur = std::move(h);
    }
    return cur;
}

}  // namespace detail

[[nodiscard]] inline std::vector<double> forward(const NetworkSpec& spec, const ParameterVector& pv,
                                                 const std::vector<double>& x) {
    return detail::run_forward(spec, pv, x, nullptr);
}

[[nodiscard]] inline double forward_scalar(const NetworkSpec& spec, const ParameterVector& pv,
                                           const std::vector<double>& x) {
    if (spec.output_dim != 1) throw std::invalid_argument("forward_scalar: output_dim != 1");
    return forward(spec, pv, x)[0];
}

}  // namespace onet::nn
