#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "onet/model/deeponet.hpp"

namespace onet::model {

namespace detail {

inline void write_spec(std::ostream& os, const nn::NetworkSpec& spec) {
    os << spec.input_dim << ' ' << spec.output_dim << ' ' << spec.depth();
    for (const nn::LayerSpec& l : spec.hidden) os << ' ' << l.width << ' ' << nn::to_string(l.activation);
    os << '\n';
}

[[nodiscard]] inline nn::NetworkSpec read_spec(std::istream& is) {
    nn::NetworkSpec spec;
    int depth = 0;
    if (!(is >> spec.input_dim >> spec.output_dim >> depth))
        throw std::runtime_error("checkpoint: bad network shape");
    for (int i = 0; i < depth; ++i) {
        int width = 0;
        std::string act;
        if (!(is >> width >> act)) throw std::runtime_error("checkpoint: bad layer");
        spec.hidden.push_back({width, nn::activation_from_string(act)});
    }
    spec.validate();
    return spec;
}

inline void write_params(std::ostream& os, const nn::ParameterVector& pv) {
    os << pv.layout.total << '\n';
    char buf[32];
    for (double v : pv.data) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << '\n';
    }
}

inline void read_params(std::istream& is, nn::ParameterVector& pv) {
    std::size_t count = 0;
    if (!(is >> count) || count != pv.layout.total)
        throw std::runtime_error("checkpoint: parameter count mismatch");
    for (double& v : pv.data)
        if (!(is >> v)) throw std::runtime_error("checkpoint: truncated parameters");
}

}  // namespace detail

inline void write_model(const DeepONetModel& model, const std::string& path) {
    std::ostringstream os;
    os << "onet-deeponet 1\n";
    os << model.dim << ' ' << model.enc_n << ' ' << model.p << '\n';
    os << to_string(model.trunk_cfg.mode) << ' ' << to_string(model.sharing) << '\n';
    os << model.regime.lambda << ' ' << model.regime.q << ' ' << model.regime.base_width << ' '
       << model.regime.base_depth << '\n';
    os << model.trunk_cfg.K << ' ' << model.trunk_cfg.n << ' ' << model.trunk_cfg.width << ' '
       << model.trunk_cfg.depth << ' ' << nn::to_string(model.trunk_cfg.activation) << '\n';
    detail::write_spec(os, model.branch_spec);
    os << model.branch_params.size() << '\n';
    for (const auto& pv : model.branch_params) detail::write_params(os, pv);
    if (model.trunk_cfg.mode == TrunkMode::trainable) {
        detail::write_spec(os, model.trunk_spec);
        detail::write_params(os, model.trunk_params);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
    out << os.str();
    if (!out.flush()) throw std::runtime_error("checkpoint: write failed for " + path);
}

[[nodiscard]] inline DeepONetModel read_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "onet-deeponet" || version != 1)
        throw std::runtime_error("checkpoint: not a model file");

    DeepONetModel model;
    std::string mode, sharing, act;
    if (!(is >> model.dim >> model.enc_n >> model.p)) throw std::runtime_error("checkpoint: bad header");
    if (!(is >> mode >> sharing)) throw std::runtime_error("checkpoint: bad header");
    if (!(is >> model.regime.lambda >> model.regime.q >> model.regime.base_width >>
          model.regime.base_depth))
        throw std::runtime_error("checkpoint: bad regime");
    if (!(is >> model.trunk_cfg.K >> model.trunk_cfg.n >> model.trunk_cfg.width >>
          model.trunk_cfg.depth >> act))
        throw std::runtime_error("checkpoint: bad trunk shape");
    model.trunk_cfg.mode = trunk_mode_from_string(mode);
    model.trunk_cfg.dim = model.dim;
    model.trunk_cfg.activation = nn::activation_from_string(act);
    model.sharing = branch_sharing_from_string(sharing);

    model.branch_spec = detail::read_spec(is);
    std::size_t branch_count = 0;
    if (!(is >> branch_count)) throw std::runtime_error("checkpoint: bad branch count");
    for (std::size_t k = 0; k < branch_count; ++k) {
        nn::ParameterVector pv(model.branch_spec);
        detail::read_params(is, pv);
        model.branch_params.push_back(std::move(pv));
    }
    if (model.trunk_cfg.mode == TrunkMode::trainable) {
        model.trunk_spec = detail::read_spec(is);
        model.trunk_params = nn::ParameterVector(model.trunk_spec);
        detail::read_params(is, model.trunk_params);
    } else {
        model.basis = trunk::trunk_basis(model.trunk_cfg.K, model.trunk_cfg.n, model.dim);
        if (model.basis.p() != model.p) throw std::runtime_error("checkpoint: basis size mismatch");
    }
    return model;
}

}  // namespace onet::model
