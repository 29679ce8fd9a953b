#pragma once

#include "higcn/dataset.hpp"
#include "higcn/tape.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace higcn {

// MLP head: hidden layers with ReLU, then a linear map to the three classes.
struct HeadParams {
    std::vector<Var> hidden_weights;  // first is 2d x d, the rest d x d
    std::vector<Var> hidden_biases;   // 1 x d
    Var output_weight;                // d x 3
    Var output_bias;                  // 1 x 3
};

struct HeadOutput {
    Var logits;         // 1 x 3
    Var probabilities;  // 1 x 3
};

// P = softmax(MLP(R (+) h_cls)).
HeadOutput classify(Tape& tape, Var pooled, Var h_cls, const HeadParams& head);

// argmax with ties toward the lowest class index.
Label predicted_label(std::span<const double> probabilities);

// Confusion counts indexed [gold][predicted].
using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::array<double, kNumClasses> per_class_f1{};
    Confusion confusion{};
    std::size_t total = 0;

    bool operator==(const Metrics&) const = default;
};

// Per-class F1 = 2tp / (2tp + fp + fn); a class with no gold and no predicted
// instances scores 0. Macro-F1 averages the three values.
Metrics metrics_from_confusion(const Confusion& confusion);

// Single deterministic pass; the predictor is called once per sample.
Metrics evaluate(const Dataset& dataset, const std::function<Label(const Sample&)>& predictor);

// Flat report: accuracy, macro_f1, per_class_f1.{pos,neu,neg}.
std::string metrics_report(const Metrics& metrics);
void write_metrics_report(const std::filesystem::path& path, const Metrics& metrics);

}  // namespace higcn
