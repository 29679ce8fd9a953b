#include "higcn/model.hpp"

#include "higcn/error.hpp"

#include <cmath>

namespace higcn {

namespace param_names {

std::string layer(std::size_t l, const char* leaf) {
    return "layer" + std::to_string(l) + "." + leaf;
}

std::string head_hidden(std::size_t i, const char* leaf) {
    return "head.hidden" + std::to_string(i) + "." + leaf;
}

}  // namespace param_names

namespace {

struct ParamSpec {
    std::string name;
    std::size_t rows;
    std::size_t cols;
    bool bias;
};

std::vector<ParamSpec> param_specs(const ModelConfig& c) {
    using namespace param_names;
    const std::size_t d = c.d;
    std::vector<ParamSpec> specs;
    if (c.mode == EncoderMode::toy) {
        specs.push_back({kEmbedding, c.toy_vocab, d, false});
    }
    specs.push_back({kQuery, d, d, false});
    specs.push_back({kKey, d, d, false});
    specs.push_back({kValue, d, d, false});
    for (std::size_t l = 0; l < c.layers; ++l) {
        specs.push_back({layer(l, "gate_target.weight"), 2 * d, d, false});
        specs.push_back({layer(l, "gate_target.bias"), 1, d, true});
        specs.push_back({layer(l, "gate_context.weight"), 2 * d, d, false});
        specs.push_back({layer(l, "gate_context.bias"), 1, d, true});
        specs.push_back({layer(l, "conv.weight"), d, d, false});
        specs.push_back({layer(l, "conv.bias"), 1, d, true});
        if (!c.share_attribute_projection) {
            specs.push_back({layer(l, "attribute_projection"), d, d, false});
        }
    }
    if (c.share_attribute_projection) {
        specs.push_back({kSharedAttributeProjection, d, d, false});
    }
    for (std::size_t i = 0; i < c.head_layers; ++i) {
        specs.push_back({head_hidden(i, "weight"), i == 0 ? 2 * d : d, d, false});
        specs.push_back({head_hidden(i, "bias"), 1, d, true});
    }
    specs.push_back({"head.output.weight", d, kNumClasses, false});
    specs.push_back({"head.output.bias", 1, kNumClasses, true});
    return specs;
}

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

GateMode gate_for(Variant v) {
    switch (v) {
        case Variant::no_context_gating: return GateMode::target_only;
        case Variant::no_target_gating: return GateMode::context_only;
        default: return GateMode::co;
    }
}

double alpha_for(const ModelConfig& c) {
    switch (c.variant) {
        case Variant::no_syntax: return 0.0;
        case Variant::no_semantics: return 1.0;
        default: return c.alpha;
    }
}

}  // namespace

ParamStore init_params(const ModelConfig& config, std::uint64_t seed) {
    ParamStore store;
    for (const auto& spec : param_specs(config)) {
        Matrix m(spec.rows, spec.cols);
        if (!spec.bias) {
            Rng rng(seed, name_hash(spec.name));
            const double a = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
            for (double& v : m.data()) {
                v = rng.uniform(-a, a);
            }
        }
        store.set(spec.name, std::move(m));
    }
    return store;
}

Model::Model(ModelConfig config, ParamStore params) : config_(config), params_(std::move(params)) {
    for (const auto& spec : param_specs(config_)) {
        if (!params_.contains(spec.name)) {
            throw ConfigError("model: missing parameter '" + spec.name + "'");
        }
        const Matrix& m = params_.at(spec.name);
        if (m.rows() != spec.rows || m.cols() != spec.cols) {
            throw ShapeError("model: parameter '" + spec.name + "' is " + m.shape_string() + ", expected " +
                             std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
        }
    }
}

std::size_t Model::attribute_count(const Sample& sample) const {
    if (config_.variant == Variant::no_attribute) {
        return 0;
    }
    return std::min(config_.k, sample.attributes.size());
}

ForwardTrace Model::forward(const Sample& sample, const ForwardOptions& options) const {
    using namespace param_names;
    const bool use_dropout = options.training && config_.dropout > 0.0;
    if (use_dropout && options.dropout_rng == nullptr) {
        throw ConfigError("forward: training with dropout needs a generator");
    }
    if (config_.mode == EncoderMode::precomputed && sample.precomputed &&
        sample.precomputed->context.cols() != config_.d) {
        throw ConfigError("forward: sample '" + sample.id + "' has states of width " +
                          std::to_string(sample.precomputed->context.cols()) + " but d=" + std::to_string(config_.d));
    }

    ForwardTrace trace;
    trace.tape = std::make_unique<Tape>(&params_);
    Tape& tape = *trace.tape;
    trace.attribute_nodes = attribute_count(sample);

    std::optional<Var> table;
    if (config_.mode == EncoderMode::toy) {
        table = tape.param(kEmbedding);
    }
    const EmbedOutput emb = embed(tape, sample, config_.mode, trace.attribute_nodes, table);
    const AttentionOutput att =
        non_local_self_attention(tape, emb.h_hat, tape.param(kQuery), tape.param(kKey), tape.param(kValue));
    EncoderOutput& enc = trace.encoder;
    enc.h_hat = emb.h_hat;
    enc.a_sat = att.a_sat;
    enc.h = att.h;
    enc.r_t = target_representation(tape, att.h, sample.target_start, sample.target_len);
    enc.h_cls = emb.h_cls;
    enc.attribute_states = emb.attribute_states;

    const Matrix syntax = build_syntax_adjacency(sample);
    trace.graph = build_hig_on_tape(tape, sample, syntax, att.a_sat, alpha_for(config_), config_.beta,
                                    trace.attribute_nodes);

    StackParams stack;
    for (std::size_t l = 0; l < config_.layers; ++l) {
        stack.layers.push_back(LayerParams{
            tape.param(layer(l, "gate_target.weight")),
            tape.param(layer(l, "gate_target.bias")),
            tape.param(layer(l, "gate_context.weight")),
            tape.param(layer(l, "gate_context.bias")),
            tape.param(layer(l, "conv.weight")),
            tape.param(layer(l, "conv.bias")),
        });
        stack.attribute_projection.push_back(config_.share_attribute_projection
                                                 ? tape.param(kSharedAttributeProjection)
                                                 : tape.param(layer(l, "attribute_projection")));
    }
    StackOptions so;
    so.layers = config_.layers;
    so.lambda = config_.lambda;
    so.vanilla = config_.variant == Variant::no_hig2cn;
    so.conv.gate = options.overrides.gate.value_or(gate_for(config_.variant));
    so.conv.position_weighting = options.overrides.position_weighting.value_or(true);
    so.dropout = config_.dropout;
    so.dropout_rng = use_dropout ? options.dropout_rng : nullptr;
    StackOutput stacked = hig2cn_forward(tape, sample, enc, trace.graph, stack, so);
    trace.layer_states = std::move(stacked.states);
    trace.pooled = stacked.pooled;

    HeadParams head;
    for (std::size_t i = 0; i < config_.head_layers; ++i) {
        head.hidden_weights.push_back(tape.param(head_hidden(i, "weight")));
        head.hidden_biases.push_back(tape.param(head_hidden(i, "bias")));
    }
    head.output_weight = tape.param("head.output.weight");
    head.output_bias = tape.param("head.output.bias");
    Var pooled = trace.pooled;
    Var cls = enc.h_cls;
    if (use_dropout) {
        pooled = apply_dropout(tape, pooled, config_.dropout, *options.dropout_rng);
        cls = apply_dropout(tape, cls, config_.dropout, *options.dropout_rng);
    }
    trace.head = classify(tape, pooled, cls, head);
    return trace;
}

Label Model::predict(const Sample& sample) const {
    return predicted_label(forward(sample).probabilities());
}

HIGraph Model::graph_for(const Sample& sample) const {
    const ForwardTrace trace = forward(sample);
    HIGraph g;
    g.context_nodes = trace.graph.context_nodes;
    g.attribute_nodes = trace.graph.attribute_nodes;
    g.adjacency = trace.tape->value(trace.graph.adjacency);
    g.kinds = node_kinds(sample, g.attribute_nodes);
    g.alpha = alpha_for(config_);
    g.beta = config_.beta;
    return g;
}

double batch_loss(std::span<const Sample> samples, const Model& model) {
    if (samples.empty()) {
        throw ConfigError("batch_loss: empty batch");
    }
    double total = 0.0;
    for (const auto& s : samples) {
        const ForwardTrace trace = model.forward(s);
        total += cross_entropy(trace.probabilities(), static_cast<std::size_t>(s.label)).loss;
    }
    return total;
}

Metrics evaluate(const Dataset& dataset, const Model& model) {
    return evaluate(dataset, [&model](const Sample& s) { return model.predict(s); });
}

}  // namespace higcn
