#pragma once

#include "higcn/matrix.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace higcn {

enum class Domain { laptop, restaurant };
enum class Label : std::size_t { positive = 0, neutral = 1, negative = 2 };
enum class Split { train, test };

inline constexpr std::size_t kNumClasses = 3;

std::string_view to_string(Domain d);
std::string_view to_string(Label l);
std::string_view to_string(Split s);
Domain parse_domain(std::string_view s);
Label parse_label(std::string_view s);
Split parse_split(std::string_view s);

// Frozen-encoder states exported alongside a sample.
struct PrecomputedStates {
    Matrix context;     // Nc x d
    Matrix cls;         // 1 x d
    Matrix attributes;  // K x d

    bool operator==(const PrecomputedStates&) const = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

struct Sample {
    std::string id;
    Domain domain = Domain::laptop;
    std::vector<std::string> context_tokens;
    std::size_t target_start = 0;
    std::size_t target_len = 1;
    Label label = Label::neutral;
    std::vector<std::string> attributes;
    std::vector<Edge> syntax_edges;  // unordered pairs, 0-based
    std::optional<PrecomputedStates> precomputed;

    std::size_t context_size() const noexcept { return context_tokens.size(); }
    bool in_target(std::size_t i) const noexcept {
        return i >= target_start && i < target_start + target_len;
    }

    bool operator==(const Sample&) const = default;
};

// Throws ValidationError naming the sample id and offending field.
void validate(const Sample& sample);

using ClassCounts = std::array<std::size_t, kNumClasses>;

struct Dataset {
    std::string name;
    Split split = Split::train;
    std::vector<Sample> samples;
    ClassCounts class_counts{};

    std::size_t size() const noexcept { return samples.size(); }
};

ClassCounts count_labels(const std::vector<Sample>& samples);

// Published label counts of the three SemEval benchmarks (positive, neutral,
// negative). `name` is one of laptop14, restaurant14, restaurant15.
std::optional<ClassCounts> reference_statistics(std::string_view name, Split split);

// One JSON object per line. Dataset name and split come from the file stem
// `<name>_<split>` (split defaults to train). Samples flagged `precomputed`
// read their states from `<file>.states/<id>.bin`: three matrix blocks
// (context, cls, attributes). Id characters outside [A-Za-z0-9._-] appear
// in the file name as %XX.
Dataset load_dataset(const std::filesystem::path& path);

// Canonical writer: keys sorted, compact, one record per line. Precomputed
// states go to the sidecar directory next to `path`.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::string sample_to_json_line(const Sample& sample);

// Symmetric 0/1 adjacency over context tokens: parser edges, unit diagonal,
// and a fully connected target block.
Matrix build_syntax_adjacency(const Sample& sample);

enum class SynthMode { plain, attribute_coded };

struct SynthOptions {
    std::uint64_t seed = 7;
    std::size_t n_samples = 200;
    std::size_t nc_min = 5;
    std::size_t nc_max = 10;
    std::size_t k = 2;
    std::size_t vocab_size = 32;
    SynthMode mode = SynthMode::plain;
    Domain domain = Domain::laptop;
};

SynthMode parse_synth_mode(std::string_view s);

// Vocabulary of the synthetic fixtures. Cue words carry the sentiment of the
// target they sit next to; code words shift the label in attribute-coded mode.
namespace synth_vocab {
inline constexpr std::array<std::string_view, kNumClasses> kCueWords = {"w0", "w1", "w2"};
inline constexpr std::array<std::string_view, kNumClasses> kCodeWords = {"a0", "a1", "a2"};
inline constexpr std::size_t kCueRadius = 2;
inline constexpr std::size_t kFillerAttributes = 7;
}  // namespace synth_vocab

// Deterministic synthetic dataset with a planted labelling rule:
//   plain:           label = class of the cue word within distance 2 of the target
//   attribute_coded: label = (cue class + code of attribute 0) mod 3
Dataset synth_fixture(const SynthOptions& options);

}  // namespace higcn
