#include "higcn/trainer.hpp"

#include "higcn/error.hpp"
#include "higcn/optim.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace higcn {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;  // "SHUFF"
constexpr std::uint64_t kDropoutStream = 0x44524f50ULL;    // "DROP"

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string format_epoch_log(const EpochLog& log) {
    return "epoch=" + std::to_string(log.epoch) + " loss=" + fmt(log.loss) + " accuracy=" + fmt(log.accuracy) +
           " macro_f1=" + fmt(log.macro_f1) + " clamped=" + std::to_string(log.clamped);
}

TrainResult train(const TrainConfig& config, const Dataset& train_set) {
    validate(config);
    if (train_set.samples.empty()) {
        throw ConfigError("train: empty dataset");
    }
    Model model(config.model, init_params(config.model, config.seed));
    AdamW optimizer(AdamWOptions{config.lr, config.weight_decay});

    TrainResult result;
    std::optional<double> best_loss;
    result.params = model.params();

    std::vector<std::size_t> order(train_set.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(config.seed, kShuffleStream + epoch);
        Rng dropout_rng(config.seed, kDropoutStream + epoch);
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        EpochLog log;
        log.epoch = epoch;
        Confusion confusion{};
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            ParamStore grads = model.params().zeros_like();
            for (std::size_t b = begin; b < end; ++b) {
                const Sample& s = train_set.samples[order[b]];
                ForwardOptions fo;
                fo.training = true;
                fo.dropout_rng = &dropout_rng;
                ForwardTrace trace = model.forward(s, fo);
                const auto gold = static_cast<std::size_t>(s.label);
                Tape& tape = *trace.tape;
                const Var loss = tape.softmax_cross_entropy(trace.head.logits, gold);
                const double value = tape.scalar(loss);
                if (!std::isfinite(value)) {
                    throw TrainingError(optimizer.steps(), "non-finite loss on sample '" + s.id + "'");
                }
                if (trace.probabilities()[gold] < 1e-12) {
                    ++log.clamped;
                }
                log.loss += value;
                ++confusion[gold][static_cast<std::size_t>(predicted_label(trace.probabilities()))];
                tape.backward(loss);
                grads.accumulate(tape.parameter_gradients());
            }
            optimizer.step(model.params(), grads);
        }
        if (!std::isfinite(log.loss)) {
            throw TrainingError(optimizer.steps(), "non-finite epoch loss");
        }
        const Metrics m = metrics_from_confusion(confusion);
        log.accuracy = m.accuracy;
        log.macro_f1 = m.macro_f1;
        result.log.push_back(log);

        const bool take = config.selection == Selection::final_epoch || !best_loss || log.loss < *best_loss;
        if (take) {
            best_loss = log.loss;
            result.params = model.params();
            result.selected_epoch = epoch;
        }
    }
    return result;
}

Metrics run_ablation(const TrainConfig& config, Variant variant, const Dataset& train_set, const Dataset& eval_set) {
    TrainConfig c = config;
    c.model.variant = variant;
    const TrainResult trained = train(c, train_set);
    return evaluate(eval_set, Model(c.model, trained.params));
}

SweepParameter parse_sweep_parameter(std::string_view s) {
    if (s == "K") return SweepParameter::k;
    if (s == "L") return SweepParameter::layers;
    throw ConfigError("unknown sweep parameter '" + std::string(s) + "' (expected K|L)");
}

std::string_view to_string(SweepParameter p) {
    return p == SweepParameter::k ? "K" : "L";
}

std::vector<SweepRow> sweep(const TrainConfig& config, SweepParameter parameter, const std::vector<std::size_t>& values,
                            const Dataset& train_set, const Dataset& eval_set, std::size_t workers) {
    if (values.empty()) {
        throw ConfigError("sweep: no values");
    }
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            SweepRow& row = rows[i];
            row.parameter = parameter;
            row.value = values[i];
            TrainConfig c = config;
            if (parameter == SweepParameter::k) {
                c.model.k = values[i];
            } else {
                c.model.layers = values[i];
            }
            try {
                const TrainResult trained = train(c, train_set);
                row.metrics = evaluate(eval_set, Model(c.model, trained.params));
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(workers, values.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (auto& th : pool) {
        th.join();
    }
    return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "parameter\tvalue\taccuracy\tmacro_f1\tstatus\n";
    for (const auto& r : rows) {
        os << to_string(r.parameter) << '\t' << r.value << '\t';
        if (r.metrics) {
            os << fmt(r.metrics->accuracy) << '\t' << fmt(r.metrics->macro_f1) << "\tok\n";
        } else {
            os << "nan\tnan\terror: " << r.error << '\n';
        }
    }
    return os.str();
}

SeedSummary summarize(const std::vector<Metrics>& runs) {
    SeedSummary s;
    s.runs = runs.size();
    if (runs.empty()) {
        return s;
    }
    const double n = static_cast<double>(runs.size());
    for (const auto& m : runs) {
        s.accuracy_mean += m.accuracy / n;
        s.macro_f1_mean += m.macro_f1 / n;
    }
    if (runs.size() > 1) {
        double va = 0.0;
        double vf = 0.0;
        for (const auto& m : runs) {
            va += (m.accuracy - s.accuracy_mean) * (m.accuracy - s.accuracy_mean);
            vf += (m.macro_f1 - s.macro_f1_mean) * (m.macro_f1 - s.macro_f1_mean);
        }
        s.accuracy_std = std::sqrt(va / (n - 1.0));
        s.macro_f1_std = std::sqrt(vf / (n - 1.0));
    }
    return s;
}

void write_run_directory(const std::filesystem::path& dir, const std::string& config_snapshot,
                         const TrainResult& result, const std::optional<Metrics>& metrics) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "config.txt");
        os << config_snapshot;
    }
    {
        std::ofstream os(dir / "epochs.log", std::ios::app);
        for (const auto& l : result.log) {
            os << format_epoch_log(l) << '\n';
        }
    }
    if (metrics) {
        write_metrics_report(dir / "metrics.txt", *metrics);
    }
    save_params(dir / "params.bin", result.params);
}

}  // namespace higcn
