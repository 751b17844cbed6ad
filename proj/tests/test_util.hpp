#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "onet/nn/backprop.hpp"
#include "onet/nn/forward.hpp"
#include "onet/nn/jet.hpp"

namespace testutil {

// Central difference in one coordinate of a vector argument.
inline double central_diff(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x, std::size_t i, double h) {
    x[i] += h;
    const double fp = f(x);
    x[i] -= 2.0 * h;
    const double fm = f(x);
    return (fp - fm) / (2.0 * h);
}

inline double second_diff(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x, std::size_t i, double h) {
    const double f0 = f(x);
    x[i] += h;
    const double fp = f(x);
    x[i] -= 2.0 * h;
    const double fm = f(x);
    return (fp - 2.0 * f0 + fm) / (h * h);
}

inline double mixed_diff(const std::function<double(const std::vector<double>&)>& f,
                         std::vector<double> x, std::size_t i, std::size_t j, double h) {
    auto at = [&](double di, double dj) {
        std::vector<double> y = x;
        y[i] += di;
        y[j] += dj;
        return f(y);
    };
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
}

// Smallest |pre-activation| over all hidden nodes; finite-difference oracles
// are only trusted when the stencil stays on one side of every kink.
inline double min_preactivation_abs(const onet::nn::NetworkSpec& spec,
                                    const onet::nn::ParameterVector& pv,
                                    const std::vector<double>& x) {
    onet::nn::detail::ValueTape tape;
    onet::nn::detail::run_forward(spec, pv, x, &tape);
    double m = 1e300;
    for (int i = 0; i < spec.depth(); ++i)
        for (double h : tape.pre[static_cast<std::size_t>(i)]) m = std::min(m, std::abs(h));
    return m;
}

inline double rel_err(double got, double want, double floor_scale) {
    return std::abs(got - want) / std::max(std::abs(want), floor_scale);
}

}  // namespace testutil
