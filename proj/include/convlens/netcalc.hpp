#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netarch.hpp"

namespace convlens {

struct CostRow {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t flops = 0;
    std::uint64_t out_floats = 0;
};

struct CostReport {
    std::vector<CostRow> rows;
    std::uint64_t total_params = 0;
    std::uint64_t total_flops = 0;
    std::uint64_t total_out_floats = 0;
};

struct DenseBlockParams {
    // The closed form as printed and the evaluated summation disagree; both
    // are reported.
    std::uint64_t printed = 0;
    std::uint64_t summation = 0;
};

inline DenseBlockParams dense_block_params(std::uint64_t depth, std::uint64_t growth) {
    if (depth < 1 || growth < 1)
        throw std::invalid_argument("dense block depth and growth must be >= 1");
    const std::uint64_t n2 = growth * growth;
    DenseBlockParams out;
    out.printed = depth + 9 * growth + 9 * n2 * (depth * depth - depth) / 2;
    out.summation = depth + 9 * growth + 9 * n2 * (depth * (depth + 1)) / 2;
    return out;
}

namespace detail {

inline std::uint64_t layer_params(const LayerSpec& l, const Shape& in) {
    switch (l.kind) {
    case LayerKind::conv: {
        const std::uint64_t d = l.in_channels_override.value_or(in.channels);
        return l.filters * (d * l.kernel_w * l.kernel_h + (l.bias ? 1 : 0));
    }
    case LayerKind::fc:
        return l.filters * (in.floats() + (l.bias ? 1 : 0));
    case LayerKind::bn:
        return 2 * in.channels;
    case LayerKind::scaledavgpool:
        return 2; // one scale and one bias per layer
    case LayerKind::dense:
        return dense_block_params(l.dense_layers, l.dense_growth).printed;
    default:
        return 0;
    }
}

inline std::uint64_t layer_flops(const LayerSpec& l, const Shape& in, const Shape& out,
                                 std::uint64_t act_cost) {
    switch (l.kind) {
    case LayerKind::conv: {
        const std::uint64_t d = l.in_channels_override.value_or(in.channels);
        return (2 * l.kernel_w * l.kernel_h * d - 1) * (l.filters * out.width * out.height);
    }
    case LayerKind::fc:
        return 2 * l.filters * in.floats();
    case LayerKind::act:
        return act_cost * out.floats();
    case LayerKind::bn:
        return 2 * in.channels; // same as the parameter count
    case LayerKind::maxpool:
    case LayerKind::avgpool:
    case LayerKind::scaledavgpool:
        // 5 FLOPs per kernel application.
        return (in.width * in.height) / (l.stride * l.stride) * in.channels * 5;
    case LayerKind::gap:
        return in.channels;
    default: // input, dropout, lcn, flatten, dense
        return 0;
    }
}

inline std::string row_name(const LayerSpec& l) {
    std::ostringstream name;
    name << kind_name(l.kind);
    switch (l.kind) {
    case LayerKind::conv:
        name << ' ' << l.filters << '@' << l.kernel_w << 'x' << l.kernel_h << '/' << l.stride;
        break;
    case LayerKind::fc:
        name << ' ' << l.filters;
        break;
    case LayerKind::maxpool:
    case LayerKind::avgpool:
    case LayerKind::scaledavgpool:
        name << ' ' << l.kernel_w << 'x' << l.kernel_h << '/' << l.stride;
        break;
    case LayerKind::act:
        name << ' ' << l.activation;
        break;
    case LayerKind::dense:
        name << ' ' << l.dense_layers << 'x' << l.dense_growth;
        break;
    default:
        break;
    }
    return name.str();
}

} // namespace detail

/// Per-layer parameters, FLOPs and output float counts. The input layer
/// contributes a row with its own float count so memory sums cover the whole
/// forward pass.
inline CostReport cost_report(const ArchSpec& arch, std::uint64_t act_cost = 5) {
    CostReport rep;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const LayerSpec& l = arch.layers[i];
        const Shape& out = arch.shapes[i];
        CostRow row;
        row.name = detail::row_name(l);
        row.out_floats = out.floats();
        if (l.kind != LayerKind::input) {
            const Shape& in = arch.shapes[i - 1];
            row.params = detail::layer_params(l, in);
            row.flops = detail::layer_flops(l, in, out, act_cost);
        }
        rep.total_params += row.params;
        rep.total_flops += row.flops;
        rep.total_out_floats += row.out_floats;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

struct MemoryFootprint {
    std::uint64_t training_bytes = 0;
    std::uint64_t inference_bytes = 0;
    std::uint64_t batch = 1;
    std::uint64_t bytes_per_value = 4;
    std::uint64_t optimizer_factor = 0; // 0 plain gradient descent, 2 Adam
};

/// Training: all activations of one mini-batch plus weights and optimizer
/// state. Inference: the widest pair of consecutive layers plus weights.
inline MemoryFootprint memory_footprint(const ArchSpec& arch, std::uint64_t batch,
                                        std::uint64_t bytes_per_value,
                                        std::uint64_t optimizer_factor) {
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    const CostReport rep = cost_report(arch);
    std::uint64_t activations = 0;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) activations += rep.rows[i].out_floats;
    std::uint64_t widest_pair = 0;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
        widest_pair = std::max(widest_pair, rep.rows[i].out_floats + rep.rows[i + 1].out_floats);

    MemoryFootprint mem;
    mem.batch = batch;
    mem.bytes_per_value = bytes_per_value;
    mem.optimizer_factor = optimizer_factor;
    mem.training_bytes =
        bytes_per_value * (batch * activations + rep.total_params * (1 + optimizer_factor));
    mem.inference_bytes = bytes_per_value * (widest_pair + rep.total_params);
    return mem;
}

} // namespace convlens
