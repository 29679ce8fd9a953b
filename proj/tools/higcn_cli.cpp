// higcn: command-line front end for training, evaluating, and inspecting the
// heterogeneous-graph target sentiment classifier.

#include "higcn/config.hpp"
#include "higcn/dataset.hpp"
#include "higcn/diagnostics.hpp"
#include "higcn/error.hpp"
#include "higcn/hig.hpp"
#include "higcn/model.hpp"
#include "higcn/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace higcn;

namespace {

const std::vector<std::string> kPassthroughKeys = {"command", "data", "eval_data"};

struct CommonOptions {
    std::vector<std::string> data;
    std::string out;
    std::string seeds;
    std::string config_file;
    std::string mode;
    std::string variant;
    std::vector<std::string> settings;
    bool toy = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--data", o.data, "Dataset file(s): training set, then optional evaluation set")->expected(1, 2);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seeds, "Seed or comma-separated seed list");
    cmd->add_option("--config", o.config_file, "key=value config file");
    cmd->add_option("--mode", o.mode, "Encoder mode: toy|precomputed");
    cmd->add_option("--variant", o.variant, "Model variant (full or an ablation name)");
    cmd->add_option("--set", o.settings, "key=value override (repeatable)");
    cmd->add_flag("--toy", o.toy, "Start from the desk-scale toy defaults");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError("invalid seed '" + item + "'");
        }
    }
    return out;
}

std::vector<std::size_t> parse_value_list(const std::vector<std::string>& items) {
    std::vector<std::size_t> out;
    for (const auto& raw : items) {
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) {
                continue;
            }
            try {
                std::size_t used = 0;
                out.push_back(std::stoul(item, &used));
                if (used != item.size()) {
                    throw std::invalid_argument(item);
                }
            } catch (const std::exception&) {
                throw ConfigError("invalid sweep value '" + item + "'");
            }
        }
    }
    return out;
}

struct Resolved {
    TrainConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> data;
};

// Precedence: command line > config file > defaults.
Resolved resolve(const CommonOptions& o) {
    Resolved r;
    r.config = o.toy ? toy_defaults() : TrainConfig{};
    std::vector<std::string> file_data;
    if (!o.config_file.empty()) {
        const auto parsed = load_settings_file(o.config_file, r.config, kPassthroughKeys);
        r.config = parsed.config;
        for (const auto& [k, v] : parsed.extra) {
            if (k == "data" || k == "eval_data") {
                file_data.push_back(v);
            }
        }
    }
    if (!o.mode.empty()) {
        r.config.model.mode = parse_encoder_mode(o.mode);
    }
    if (!o.variant.empty()) {
        r.config.model.variant = parse_variant(o.variant);
    }
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + s + "' is not key=value");
        }
        apply_setting(r.config, s.substr(0, eq), s.substr(eq + 1));
    }
    r.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{r.config.seed} : parse_seed_list(o.seeds);
    if (r.seeds.empty()) {
        throw ConfigError("empty seed list");
    }
    r.config.seed = r.seeds.front();
    r.data = o.data.empty() ? file_data : o.data;
    validate(r.config);
    return r;
}

std::string snapshot(const std::string& command, const TrainConfig& c, const std::vector<std::string>& data) {
    std::string text = "command=" + command + "\n" + to_settings_text(c);
    if (!data.empty()) {
        text += "data=" + fs::absolute(data[0]).string() + "\n";
    }
    if (data.size() > 1) {
        text += "eval_data=" + fs::absolute(data[1]).string() + "\n";
    }
    return text;
}

std::pair<Dataset, Dataset> load_train_eval(const std::vector<std::string>& data) {
    if (data.empty()) {
        throw ConfigError("--data is required");
    }
    Dataset train_set = load_dataset(data[0]);
    Dataset eval_set = data.size() > 1 ? load_dataset(data[1]) : train_set;
    return {std::move(train_set), std::move(eval_set)};
}

fs::path require_out(const CommonOptions& o) {
    if (o.out.empty()) {
        throw ConfigError("--out is required");
    }
    return o.out;
}

void print_metrics(const std::string& label, const Metrics& m) {
    std::printf("%s accuracy=%.6f macro_f1=%.6f\n", label.c_str(), m.accuracy, m.macro_f1);
}

int run_train(const CommonOptions& o) {
    const Resolved r = resolve(o);
    const auto [train_set, eval_set] = load_train_eval(r.data);
    const fs::path out = require_out(o);
    std::vector<Metrics> runs;
    for (const std::uint64_t seed : r.seeds) {
        TrainConfig c = r.config;
        c.seed = seed;
        const TrainResult result = train(c, train_set);
        const Metrics m = evaluate(eval_set, Model(c.model, result.params));
        const fs::path dir = r.seeds.size() == 1 ? out : out / ("seed-" + std::to_string(seed));
        write_run_directory(dir, snapshot("train", c, r.data), result, m);
        print_metrics("seed=" + std::to_string(seed), m);
        runs.push_back(m);
    }
    if (runs.size() > 1) {
        const SeedSummary s = summarize(runs);
        std::ofstream os(out / "summary.txt");
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "runs=%zu\naccuracy_mean=%.17g\naccuracy_std=%.17g\nmacro_f1_mean=%.17g\nmacro_f1_std=%.17g\n",
                      s.runs, s.accuracy_mean, s.accuracy_std, s.macro_f1_mean, s.macro_f1_std);
        os << buf;
        std::printf("mean accuracy=%.6f (std %.6f) macro_f1=%.6f (std %.6f)\n", s.accuracy_mean, s.accuracy_std,
                    s.macro_f1_mean, s.macro_f1_std);
    }
    return 0;
}

int run_eval(const CommonOptions& o, const std::string& run_dir) {
    CommonOptions with_config = o;
    if (with_config.config_file.empty()) {
        with_config.config_file = (fs::path(run_dir) / "config.txt").string();
    }
    const Resolved r = resolve(with_config);
    if (r.data.empty()) {
        throw ConfigError("--data is required");
    }
    const Dataset ds = load_dataset(r.data.back());
    const Model model(r.config.model, load_params(fs::path(run_dir) / "params.bin"));
    const Metrics m = evaluate(ds, model);
    std::cout << metrics_report(m);
    if (!o.out.empty()) {
        write_metrics_report(o.out, m);
    }
    return 0;
}

int run_gradcheck(const CommonOptions& o, double epsilon) {
    if (!o.toy) {
        throw ConfigError("gradcheck currently runs the --toy configuration only");
    }
    const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{7} : parse_seed_list(o.seeds);
    bool ok = true;
    for (const std::uint64_t seed : seeds) {
        const auto t0 = std::chrono::steady_clock::now();
        const GradCheckReport rep = toy_gradient_check(seed, epsilon);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = rep.max_rel_error < kGradCheckTolerance;
        ok = ok && pass;
        std::printf("seed=%llu entries=%zu skipped_at_kinks=%zu max_rel_error=%.3e worst=%s[%zu] analytic=%.10g numeric=%.10g time=%.2fs %s\n",
                    static_cast<unsigned long long>(seed), rep.entries_checked, rep.entries_skipped, rep.max_rel_error,
                    rep.worst_param.c_str(), rep.worst_index, rep.worst_analytic, rep.worst_numeric, secs,
                    pass ? "PASS" : "FAIL");
    }
    return ok ? 0 : 2;
}

int run_synth(const CommonOptions& o, SynthOptions so, const std::string& synth_mode, const std::string& domain) {
    const fs::path out = require_out(o);
    if (!o.seeds.empty()) {
        const auto seeds = parse_seed_list(o.seeds);
        if (seeds.size() != 1) {
            throw ConfigError("synth takes a single seed");
        }
        so.seed = seeds.front();
    }
    so.mode = parse_synth_mode(synth_mode);
    so.domain = parse_domain(domain);
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    write_dataset(synth_fixture(so), out);
    return 0;
}

int run_sweep(const CommonOptions& o, const std::string& parameter, const std::vector<std::string>& values,
              std::size_t workers) {
    const Resolved r = resolve(o);
    const auto [train_set, eval_set] = load_train_eval(r.data);
    const fs::path out = require_out(o);
    const SweepParameter p = parse_sweep_parameter(parameter);
    const auto vals = parse_value_list(values);
    fs::create_directories(out);
    std::ostringstream table;
    bool header = true;
    for (const std::uint64_t seed : r.seeds) {
        TrainConfig c = r.config;
        c.seed = seed;
        const auto rows = sweep(c, p, vals, train_set, eval_set, workers);
        std::string t = sweep_table(rows);
        if (!header) {
            t = t.substr(t.find('\n') + 1);
        }
        header = false;
        table << t;
        {
            std::ofstream os(out / ("config-seed-" + std::to_string(seed) + ".txt"));
            os << snapshot("sweep", c, r.data) << "sweep=" << parameter << "\n";
        }
    }
    std::ofstream(out / "sweep.tsv") << table.str();
    std::cout << table.str();
    return 0;
}

int run_ablate(const CommonOptions& o) {
    Resolved r = resolve(o);
    const auto [train_set, eval_set] = load_train_eval(r.data);
    const fs::path out = require_out(o);
    std::vector<Variant> variants;
    if (o.variant.empty() || o.variant == "all") {
        variants = ablation_variants();
    } else {
        variants.push_back(r.config.model.variant);
    }
    for (const Variant v : variants) {
        TrainConfig c = r.config;
        c.model.variant = v;
        const TrainResult result = train(c, train_set);
        const Metrics m = evaluate(eval_set, Model(c.model, result.params));
        write_run_directory(out / std::string(to_string(v)), snapshot("ablate", c, r.data), result, m);
        print_metrics(std::string("variant=") + std::string(to_string(v)), m);
    }
    return 0;
}

int run_inspect(const CommonOptions& o, const std::string& sample_id, const std::string& run_dir) {
    CommonOptions with_config = o;
    if (!run_dir.empty() && with_config.config_file.empty()) {
        with_config.config_file = (fs::path(run_dir) / "config.txt").string();
    }
    const Resolved r = resolve(with_config);
    if (r.data.empty()) {
        throw ConfigError("--data is required");
    }
    const Dataset ds = load_dataset(r.data.front());
    const Sample* sample = &ds.samples.front();
    if (!sample_id.empty()) {
        sample = nullptr;
        for (const auto& s : ds.samples) {
            if (s.id == sample_id) {
                sample = &s;
                break;
            }
        }
        if (sample == nullptr) {
            throw ConfigError("no sample with id '" + sample_id + "'");
        }
    }
    ParamStore params = run_dir.empty() ? init_params(r.config.model, r.config.seed)
                                        : load_params(fs::path(run_dir) / "params.bin");
    const Model model(r.config.model, std::move(params));
    std::cout << "sample=" << sample->id << '\n' << inspect(model.graph_for(*sample));
    return 0;
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += (c == '\n') ? ' ' : c;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous information graph target sentiment classifier"};
    app.require_subcommand(1);

    CommonOptions train_o, eval_o, grad_o, synth_o, sweep_o, ablate_o, inspect_o;

    auto* train_cmd = app.add_subcommand("train", "Train a model and evaluate it");
    add_common(train_cmd, train_o);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained run directory");
    add_common(eval_cmd, eval_o);
    std::string eval_run;
    eval_cmd->add_option("--run", eval_run, "Run directory written by train")->required();

    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare tape gradients with central differences");
    add_common(grad_cmd, grad_o);
    double epsilon = 1e-4;
    grad_cmd->add_option("--epsilon", epsilon, "Finite-difference step");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic fixture dataset");
    add_common(synth_cmd, synth_o);
    SynthOptions so;
    std::string synth_mode = "plain";
    std::string domain = "laptop";
    synth_cmd->add_option("--n", so.n_samples, "Number of samples");
    synth_cmd->add_option("--K", so.k, "Attributes per sample");
    synth_cmd->add_option("--vocab", so.vocab_size, "Context vocabulary size (>= 8)");
    synth_cmd->add_option("--nc-min", so.nc_min, "Minimum context length");
    synth_cmd->add_option("--nc-max", so.nc_max, "Maximum context length");
    synth_cmd->add_option("--synth-mode", synth_mode, "plain|attribute-coded");
    synth_cmd->add_option("--domain", domain, "laptop|restaurant");

    auto* sweep_cmd = app.add_subcommand("sweep", "Train/evaluate over a grid of K or L");
    add_common(sweep_cmd, sweep_o);
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    std::size_t workers = 1;
    sweep_cmd->add_option("--sweep", sweep_param, "K|L")->required();
    sweep_cmd->add_option("--values", sweep_values, "Values (space or comma separated)")->required();
    sweep_cmd->add_option("--workers", workers, "Parallel sweep cells");

    auto* ablate_cmd = app.add_subcommand("ablate", "Train ablation variants");
    add_common(ablate_cmd, ablate_o);

    auto* inspect_cmd = app.add_subcommand("inspect-graph", "Dump a sample's heterogeneous graph");
    add_common(inspect_cmd, inspect_o);
    std::string inspect_sample;
    std::string inspect_run;
    inspect_cmd->add_option("--sample", inspect_sample, "Sample id (default: first sample)");
    inspect_cmd->add_option("--run", inspect_run, "Run directory with trained parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train_cmd) return run_train(train_o);
        if (*eval_cmd) return run_eval(eval_o, eval_run);
        if (*grad_cmd) return run_gradcheck(grad_o, epsilon);
        if (*synth_cmd) return run_synth(synth_o, so, synth_mode, domain);
        if (*sweep_cmd) return run_sweep(sweep_o, sweep_param, sweep_values, workers);
        if (*ablate_cmd) return run_ablate(ablate_o);
        if (*inspect_cmd) return run_inspect(inspect_o, inspect_sample, inspect_run);
    } catch (const Error& e) {
        std::fprintf(stderr, "error kind=%s message=\"%s\"\n", e.kind().c_str(), escape(e.what()).c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error kind=internal message=\"%s\"\n", escape(e.what()).c_str());
        return 1;
    }
    return 1;
}
