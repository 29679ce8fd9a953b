#pragma once

#include "higcn/classifier.hpp"
#include "higcn/config.hpp"
#include "higcn/dataset.hpp"
#include "higcn/model.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace higcn {

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;      // summed over every training sample
    double accuracy = 0.0;  // of the training-pass predictions
    double macro_f1 = 0.0;
    std::size_t clamped = 0;  // samples whose P[gold] fell below 1e-12

    bool operator==(const EpochLog&) const = default;
};

std::string format_epoch_log(const EpochLog& log);

struct TrainResult {
    ParamStore params;
    std::vector<EpochLog> log;
    std::size_t selected_epoch = 0;  // 0 when no epochs ran
};

// Deterministic training: shuffling and dropout streams derive from
// config.seed and the epoch index. Throws TrainingError with the optimizer
// step index when the loss stops being finite.
TrainResult train(const TrainConfig& config, const Dataset& train_set);

// Trains `variant` with everything else from `config`, then evaluates on
// `eval_set`.
Metrics run_ablation(const TrainConfig& config, Variant variant, const Dataset& train_set, const Dataset& eval_set);

enum class SweepParameter { k, layers };
SweepParameter parse_sweep_parameter(std::string_view s);
std::string_view to_string(SweepParameter p);

struct SweepRow {
    SweepParameter parameter = SweepParameter::k;
    std::size_t value = 0;
    std::optional<Metrics> metrics;
    std::string error;  // set when this cell failed
};

// One full train + evaluate per value with the same seed. A failing cell is
// recorded and the sweep continues. Cells run on up to `workers` threads; the
// output keeps the order of `values`.
std::vector<SweepRow> sweep(const TrainConfig& config, SweepParameter parameter, const std::vector<std::size_t>& values,
                            const Dataset& train_set, const Dataset& eval_set, std::size_t workers = 1);

// Tab-separated, header `parameter value accuracy macro_f1 status`.
std::string sweep_table(const std::vector<SweepRow>& rows);

struct SeedSummary {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double macro_f1_mean = 0.0;
    double macro_f1_std = 0.0;
    std::size_t runs = 0;
};

// Mean and sample standard deviation over runs.
SeedSummary summarize(const std::vector<Metrics>& runs);

// Run directory: config.txt, epochs.log, metrics.txt (when given), params.bin.
void write_run_directory(const std::filesystem::path& dir, const std::string& config_snapshot,
                         const TrainResult& result, const std::optional<Metrics>& metrics);

}  // namespace higcn
