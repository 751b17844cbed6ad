#pragma once

#include <stdexcept>
#include <string>

namespace onet::nn {

// relu:  max(0, x)         piecewise linear, not differentiable at 0
// requ:  max(0, x)^2       C^1 with piecewise-linear derivative
// ident: x                 used for affine readouts and passthrough channels
//
// Derivatives at the kink use the x > 0 indicator, so relu'(0) = 0 and
// requ''(0) = 0.
enum class ActivationKind { relu, requ, ident };

[[nodiscard]] inline double act(ActivationKind k, double x) {
    switch (k) {
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::requ: return x > 0.0 ? x * x : 0.0;
        case ActivationKind::ident: return x;
    }
    throw std::logic_error("act: bad kind");
}

[[nodiscard]] inline double act_d1(ActivationKind k, double x) {
    switch (k) {
        case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::requ: return x > 0.0 ? 2.0 * x : 0.0;
        case ActivationKind::ident: return 1.0;
    }
    throw std::logic_error("act_d1: bad kind");
}

[[nodiscard]] inline double act_d2(ActivationKind k, double x) {
    switch (k) {
        case ActivationKind::relu: return 0.0;
        case ActivationKind::requ: return x > 0.0 ? 2.0 : 0.0;
        case ActivationKind::ident: return 0.0;
    }
    throw std::logic_error("act_d2: bad kind");
}

// relu has no second-order jet; everything else here does.
[[nodiscard]] inline bool is_c1(ActivationKind k) { return k != ActivationKind::relu; }

[[nodiscard]] inline std::string to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::requ: return "requ";
        case ActivationKind::ident: return "ident";
    }
    throw std::logic_error("to_string: bad kind");
}

[[nodiscard]] inline ActivationKind activation_from_string(const std::string& s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "requ") return ActivationKind::requ;
    if (s == "ident") return ActivationKind::ident;
    throw std::invalid_argument("unknown activation: " + s);
}

}  // namespace onet::nn
