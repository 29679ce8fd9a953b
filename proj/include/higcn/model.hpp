#pragma once

#include "higcn/classifier.hpp"
#include "higcn/config.hpp"
#include "higcn/dataset.hpp"
#include "higcn/encoder.hpp"
#include "higcn/hig.hpp"
#include "higcn/hig2cn.hpp"
#include "higcn/params.hpp"
#include "higcn/rng.hpp"
#include "higcn/tape.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace higcn {

// Parameter names used in the registry and in saved parameter files.
namespace param_names {
inline constexpr const char* kEmbedding = "embedding.table";
inline constexpr const char* kQuery = "attention.query";
inline constexpr const char* kKey = "attention.key";
inline constexpr const char* kValue = "attention.value";
inline constexpr const char* kSharedAttributeProjection = "attribute_projection";
std::string layer(std::size_t l, const char* leaf);
std::string head_hidden(std::size_t i, const char* leaf);
}  // namespace param_names

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)) for weights, zeros
// for biases. Each parameter draws from its own stream keyed by its name.
ParamStore init_params(const ModelConfig& config, std::uint64_t seed);

// Overrides for internal degeneration checks; not reachable from configs.
struct ForwardOverrides {
    std::optional<GateMode> gate;
    std::optional<bool> position_weighting;
};

struct ForwardOptions {
    bool training = false;
    Rng* dropout_rng = nullptr;  // required when training with dropout > 0
    ForwardOverrides overrides;
};

// Everything recorded by one forward pass over one sample.
struct ForwardTrace {
    std::unique_ptr<Tape> tape;
    EncoderOutput encoder;
    TapeGraph graph;
    std::vector<Var> layer_states;  // H^0 .. H^L
    Var pooled;
    HeadOutput head;
    std::size_t attribute_nodes = 0;

    std::span<const double> probabilities() const { return tape->value(head.probabilities).data(); }
    const Matrix& logits() const { return tape->value(head.logits); }
};

class Model {
public:
    Model(ModelConfig config, ParamStore params);

    const ModelConfig& config() const noexcept { return config_; }
    const ParamStore& params() const noexcept { return params_; }
    ParamStore& params() noexcept { return params_; }

    // Attribute nodes used for this sample under the configured K and variant.
    std::size_t attribute_count(const Sample& sample) const;

    ForwardTrace forward(const Sample& sample, const ForwardOptions& options = {}) const;

    // Evaluation-mode prediction.
    Label predict(const Sample& sample) const;

    // Fixed (parameter-independent) HIG for inspection: the context block
    // uses the attention graph under the current parameters.
    HIGraph graph_for(const Sample& sample) const;

private:
    ModelConfig config_;
    ParamStore params_;
};

// Sum over the batch of -log P[gold] (evaluation mode).
double batch_loss(std::span<const Sample> samples, const Model& model);

Metrics evaluate(const Dataset& dataset, const Model& model);

}  // namespace higcn
