#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace higcn {

enum class EncoderMode { precomputed, toy };

// Model variants: the full model and the six ablations.
enum class Variant {
    full,
    no_attribute,       // attribute nodes removed from the graph
    no_syntax,          // context block built from the attention graph alone
    no_semantics,       // context block built from the syntax graph alone
    no_hig2cn,          // plain GCN layers over the same graph
    no_context_gating,  // gate = sigmoid(target gate)
    no_target_gating,   // gate = sigmoid(context gate)
};

enum class Selection { final_epoch, best_train_loss };

EncoderMode parse_encoder_mode(std::string_view s);
std::string_view to_string(EncoderMode m);
// Accepts the ablation names NoAttribute, NoSyntax, NoSemantics, NoHIG2CN
// (also NoHIG²CN), NoContextGating, NoTargetGating, plus "full".
Variant parse_variant(std::string_view s);
std::string_view to_string(Variant v);
const std::vector<Variant>& ablation_variants();
Selection parse_selection(std::string_view s);
std::string_view to_string(Selection s);

struct ModelConfig {
    std::size_t d = 768;
    std::size_t layers = 3;
    double alpha = 0.5;
    double beta = 0.5;
    double lambda = 0.5;
    std::size_t k = 5;
    double dropout = 0.3;
    EncoderMode mode = EncoderMode::precomputed;
    std::size_t toy_vocab = 512;  // rows of the toy embedding table
    std::size_t head_layers = 1;  // hidden layers of the classifier MLP
    bool share_attribute_projection = true;
    Variant variant = Variant::full;
};

struct TrainConfig {
    ModelConfig model;
    double lr = 1e-5;
    double weight_decay = 0.05;
    std::size_t epochs = 10;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    Selection selection = Selection::best_train_loss;
};

// Throws ConfigError on out-of-range values.
void validate(const TrainConfig& config);

// Applies one `key=value` override. Unknown keys throw ConfigError.
void apply_setting(TrainConfig& config, std::string_view key, std::string_view value);

// Flat `key=value` lines, one per setting, in fixed order. Feeding the output
// back through parse_settings() reproduces the config exactly.
std::string to_settings_text(const TrainConfig& config);

// Parses `key=value` lines on top of `base`. Blank lines and `#` comments are
// ignored. Keys listed in `passthrough` are collected into `extra` instead of
// being applied (the CLI uses this for data paths).
struct ParsedSettings {
    TrainConfig config;
    std::vector<std::pair<std::string, std::string>> extra;
};
ParsedSettings parse_settings(std::string_view text, const TrainConfig& base,
                              const std::vector<std::string>& passthrough = {});
ParsedSettings load_settings_file(const std::filesystem::path& path, const TrainConfig& base,
                                  const std::vector<std::string>& passthrough = {});

// Defaults for desk-scale runs with the toy embedding encoder.
TrainConfig toy_defaults();

}  // namespace higcn
