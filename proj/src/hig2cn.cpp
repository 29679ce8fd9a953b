#include "higcn/hig2cn.hpp"

#include "higcn/error.hpp"

#include <algorithm>
#include <cstdlib>

namespace higcn {

Var co_gate(Tape& tape, Var h, Var r_t, Var h_cls, const LayerParams& layer, double lambda, GateMode mode) {
    const std::size_t n = tape.value(h).rows();
    if (mode == GateMode::off) {
        return tape.constant(Matrix(n, tape.value(h).cols(), 1.0));
    }
    auto gate_logits = [&](Var reference, Var weight, Var bias) {
        const Var joined = tape.concat_cols(h, tape.broadcast_rows(reference, n));
        return tape.add_row(tape.matmul(joined, weight), bias);
    };
    switch (mode) {
        case GateMode::target_only:
            return tape.sigmoid(gate_logits(r_t, layer.gate_target_weight, layer.gate_target_bias));
        case GateMode::context_only:
            return tape.sigmoid(gate_logits(h_cls, layer.gate_context_weight, layer.gate_context_bias));
        default: {
            const Var g_t = gate_logits(r_t, layer.gate_target_weight, layer.gate_target_bias);
            const Var g_c = gate_logits(h_cls, layer.gate_context_weight, layer.gate_context_bias);
            return tape.sigmoid(tape.add(tape.scale(g_t, lambda), tape.scale(g_c, 1.0 - lambda)));
        }
    }
}

std::vector<double> position_weights(std::size_t nc, std::size_t mu, std::size_t n_t) {
    if (n_t == 0 || mu + n_t > nc) {
        throw ShapeError("position_weights: invalid target span");
    }
    std::vector<double> w(nc);
    const std::size_t last = mu + n_t - 1;
    for (std::size_t j = 0; j < nc; ++j) {
        const std::size_t dist = j < mu ? mu - j : (j > last ? j - last : 0);
        w[j] = static_cast<double>(nc + 1 - dist) / static_cast<double>(nc + 1);  // 1 - dist/(nc+1), one rounding
    }
    return w;
}

Var degree_normalizer(Tape& tape, Var adjacency) {
    return tape.reciprocal(tape.add_scalar(tape.row_sum(adjacency), 1.0));
}

Var vanilla_gcn_layer(Tape& tape, Var h, Var adjacency, Var weight, Var bias) {
    const Matrix& a = tape.value(adjacency);
    if (a.rows() != a.cols() || a.rows() != tape.value(h).rows()) {
        throw ShapeError("vanilla_gcn_layer: adjacency " + a.shape_string() + " for states " +
                         tape.value(h).shape_string());
    }
    const Var aggregated = tape.mul_rows(tape.matmul(adjacency, tape.matmul(h, weight)), degree_normalizer(tape, adjacency));
    return tape.relu(tape.add_row(aggregated, bias));
}

Var hetero_conv_layer(Tape& tape, Var h, const TapeGraph& graph, Var r_t, Var h_cls, const LayerParams& layer,
                      Var attribute_projection, double lambda, std::span<const double> position, ConvOptions options) {
    const std::size_t nc = graph.context_nodes;
    const std::size_t n = graph.size();
    if (tape.value(h).rows() != n) {
        throw ShapeError("hetero_conv_layer: " + std::to_string(tape.value(h).rows()) + " state rows for " +
                         std::to_string(n) + " nodes");
    }
    if (position.size() != nc) {
        throw ShapeError("hetero_conv_layer: " + std::to_string(position.size()) + " position weights for " +
                         std::to_string(nc) + " context nodes");
    }

    // P_j h_j: identity for context nodes, attribute projection for attribute nodes.
    Var projected = h;
    if (graph.attribute_nodes > 0) {
        projected = tape.concat_rows(tape.slice_rows(h, 0, nc),
                                     tape.matmul(tape.slice_rows(h, nc, graph.attribute_nodes), attribute_projection));
    }
    const Var gate = co_gate(tape, h, r_t, h_cls, layer, lambda, options.gate);
    Var message = tape.hadamard(gate, projected);
    if (options.position_weighting) {
        Matrix w(n, 1, 1.0);
        for (std::size_t j = 0; j < nc; ++j) {
            w(j, 0) = position[j];
        }
        message = tape.mul_rows(message, tape.constant(std::move(w)));
    }
    const Var aggregated = tape.mul_rows(tape.matmul(graph.adjacency, tape.matmul(message, layer.conv_weight)),
                                         degree_normalizer(tape, graph.adjacency));
    return tape.relu(tape.add_row(aggregated, layer.conv_bias));
}

Var apply_dropout(Tape& tape, Var x, double rate, Rng& rng) {
    if (rate <= 0.0) {
        return x;
    }
    const Matrix& v = tape.value(x);
    Matrix mask(v.rows(), v.cols());
    const double keep = 1.0 / (1.0 - rate);
    for (double& m : mask.data()) {
        m = rng.bernoulli(rate) ? 0.0 : keep;
    }
    return tape.hadamard(x, tape.constant(std::move(mask)));
}

StackOutput hig2cn_forward(Tape& tape, const Sample& sample, const EncoderOutput& encoder, const TapeGraph& graph,
                           const StackParams& params, const StackOptions& options) {
    if (params.layers.size() < options.layers || params.attribute_projection.size() < options.layers) {
        throw ConfigError("hig2cn_forward: parameters for " + std::to_string(params.layers.size()) +
                          " layers, " + std::to_string(options.layers) + " requested");
    }
    StackOutput out;
    Var state = encoder.h;
    if (graph.attribute_nodes > 0) {
        state = tape.concat_rows(encoder.h, encoder.attribute_states);
    }
    out.states.push_back(state);

    const auto position = position_weights(sample.context_size(), sample.target_start, sample.target_len);
    for (std::size_t l = 0; l < options.layers; ++l) {
        Var input = state;
        if (options.dropout_rng != nullptr) {
            input = apply_dropout(tape, input, options.dropout, *options.dropout_rng);
        }
        const LayerParams& lp = params.layers[l];
        if (options.vanilla) {
            state = vanilla_gcn_layer(tape, input, graph.adjacency, lp.conv_weight, lp.conv_bias);
        } else {
            state = hetero_conv_layer(tape, input, graph, encoder.r_t, encoder.h_cls, lp,
                                      params.attribute_projection[l], options.lambda, position, options.conv);
        }
        out.states.push_back(state);
    }
    out.pooled = tape.mean_rows(state, sample.target_start, sample.target_len);
    return out;
}

}  // namespace higcn
