#pragma once

#include "higcn/encoder.hpp"
#include "higcn/hig.hpp"
#include "higcn/rng.hpp"
#include "higcn/tape.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace higcn {

// Per-layer weights, row-vector convention (x * W). Gate weights are 2d x d,
// acting on the concatenation (node state, reference vector).
struct LayerParams {
    Var gate_target_weight;
    Var gate_target_bias;
    Var gate_context_weight;
    Var gate_context_bias;
    Var conv_weight;  // d x d
    Var conv_bias;    // 1 x d
};

enum class GateMode {
    co,            // sigmoid(lambda * g_t + (1 - lambda) * g_c)
    target_only,   // sigmoid(g_t)
    context_only,  // sigmoid(g_c)
    off,           // all ones
};

struct ConvOptions {
    GateMode gate = GateMode::co;
    bool position_weighting = true;
};

// Gate vector for every row of `h` (n x d -> n x d, entries in (0, 1)).
Var co_gate(Tape& tape, Var h, Var r_t, Var h_cls, const LayerParams& layer, double lambda,
            GateMode mode = GateMode::co);

// w[j] = 1 - min over target positions tau of |j - tau| / (nc + 1).
std::vector<double> position_weights(std::size_t nc, std::size_t mu, std::size_t n_t);

// 1 / (d_i + 1) per row, with d_i the weighted row sum of `adjacency`.
Var degree_normalizer(Tape& tape, Var adjacency);

// h'_i = ReLU(sum_j A_ij (h_j W) / (d_i + 1) + b)
Var vanilla_gcn_layer(Tape& tape, Var h, Var adjacency, Var weight, Var bias);

// One gated heterogeneous convolution over every node of `graph`. Sender j's
// message is gate_j * (P_j h_j) * w_j, where P_j is `attribute_projection`
// for attribute nodes and the identity otherwise, and w_j is the position
// weight of context node j (1 for attribute nodes).
Var hetero_conv_layer(Tape& tape, Var h, const TapeGraph& graph, Var r_t, Var h_cls, const LayerParams& layer,
                      Var attribute_projection, double lambda, std::span<const double> position,
                      ConvOptions options = {});

struct StackOptions {
    std::size_t layers = 3;
    double lambda = 0.5;
    bool vanilla = false;  // plain GCN layers instead of the gated heterogeneous ones
    ConvOptions conv;
    double dropout = 0.0;
    Rng* dropout_rng = nullptr;  // dropout is applied only when set
};

struct StackParams {
    std::vector<LayerParams> layers;
    std::vector<Var> attribute_projection;  // one per layer (may repeat one shared node)
};

struct StackOutput {
    Var pooled;               // R, 1 x d
    std::vector<Var> states;  // H^0 .. H^L, each N x d
};

// Runs the stack from H^0 = [encoder H ; attribute states] and mean-pools the
// target rows of H^L.
StackOutput hig2cn_forward(Tape& tape, const Sample& sample, const EncoderOutput& encoder, const TapeGraph& graph,
                           const StackParams& params, const StackOptions& options);

// Inverted dropout mask application (no-op when rate == 0).
Var apply_dropout(Tape& tape, Var x, double rate, Rng& rng);

}  // namespace higcn
