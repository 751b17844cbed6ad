#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "onet/math/rng.hpp"
#include "onet/nn/activation.hpp"

namespace onet::nn {

struct LayerSpec {
    int width = 0;
    ActivationKind activation = ActivationKind::requ;
};

// Fully connected feed-forward shape: input_dim -> hidden widths -> output_dim.
// Affine map i (i = 0..depth()) has rows(i) x cols(i) weights plus rows(i)
// biases; the final affine is a plain readout with no activation.
struct NetworkSpec {
    int input_dim = 0;
    std::vector<LayerSpec> hidden;
    int output_dim = 1;

    [[nodiscard]] int depth() const { return static_cast<int>(hidden.size()); }
    [[nodiscard]] int num_affine() const { return depth() + 1; }

    [[nodiscard]] int cols(int affine) const {
        return affine == 0 ? input_dim : hidden[static_cast<std::size_t>(affine - 1)].width;
    }
    [[nodiscard]] int rows(int affine) const {
        return affine == depth() ? output_dim : hidden[static_cast<std::size_t>(affine)].width;
    }

    [[nodiscard]] int max_width() const {
        int w = 0;
        for (const LayerSpec& l : hidden) w = l.width > w ? l.width : w;
        return w;
    }

    [[nodiscard]] bool has_nonsmooth_hidden() const {
        for (const LayerSpec& l : hidden)
            if (!is_c1(l.activation)) return true;
        return false;
    }

    void validate() const {
        if (input_dim < 1) throw std::invalid_argument("NetworkSpec: input_dim must be positive");
        if (output_dim < 1) throw std::invalid_argument("NetworkSpec: output_dim must be positive");
        for (const LayerSpec& l : hidden)
            if (l.width < 1) throw std::invalid_argument("NetworkSpec: layer width must be positive");
    }
};

// Flat parameter order: affine 0 weights (row-major), affine 0 biases,
// affine 1 weights, ... A bijection between (layer, slot) and [0, total).
struct ParamLayout {
    struct Block {
        std::size_t w_off = 0;
        std::size_t b_off = 0;
        int rows = 0;
        int cols = 0;
    };
    std::vector<Block> blocks;
    std::size_t total = 0;

    [[nodiscard]] static ParamLayout of(const NetworkSpec& spec) {
        spec.validate();
        ParamLayout lay;
        std::size_t off = 0;
        for (int i = 0; i < spec.num_affine(); ++i) {
            Block b;
            b.rows = spec.rows(i);
            b.cols = spec.cols(i);
            b.w_off = off;
            off += static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols);
            b.b_off = off;
            off += static_cast<std::size_t>(b.rows);
            lay.blocks.push_back(b);
        }
        lay.total = off;
        return lay;
    }

    [[nodiscard]] std::size_t w_index(int affine, int r, int c) const {
        const Block& b = blocks[static_cast<std::size_t>(affine)];
        return b.w_off + static_cast<std::size_t>(r) * static_cast<std::size_t>(b.cols) +
               static_cast<std::size_t>(c);
    }
    [[nodiscard]] std::size_t b_index(int affine, int r) const {
        return blocks[static_cast<std::size_t>(affine)].b_off + static_cast<std::size_t>(r);
    }
};

[[nodiscard]] inline std::size_t count_params(const NetworkSpec& spec) {
    return ParamLayout::of(spec).total;
}

struct ParameterVector {
    std::vector<double> data;
    ParamLayout layout;

    ParameterVector() = default;
    explicit ParameterVector(const NetworkSpec& spec)
        : layout(ParamLayout::of(spec)) {
        data.assign(layout.total, 0.0);
    }

    [[nodiscard]] double w(int affine, int r, int c) const { return data[layout.w_index(affine, r, c)]; }
    [[nodiscard]] double b(int affine, int r) const { return data[layout.b_index(affine, r)]; }
    double& w(int affine, int r, int c) { return data[layout.w_index(affine, r, c)]; }
    double& b(int affine, int r) { return data[layout.b_index(affine, r)]; }
};

// uniform_he: weights from U(-sqrt(3/fan_in), sqrt(3/fan_in)), biases zero.
// zeros: everything zero. explicit_values: zero placeholder, caller fills in.
enum class InitScheme { uniform_he, zeros, explicit_values };

[[nodiscard]] inline ParameterVector init_params(const NetworkSpec& spec, std::uint64_t seed,
                                                 InitScheme scheme = InitScheme::uniform_he) {
    ParameterVector pv(spec);
    if (scheme != InitScheme::uniform_he) return pv;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < spec.num_affine(); ++i) {
        const int rows = spec.rows(i);
        const int cols = spec.cols(i);
        const double half_width = std::sqrt(3.0 / cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) pv.w(i, r, c) = math::uniform_sym(rng, half_width);
    }
    return pv;
}

}  // namespace onet::nn
