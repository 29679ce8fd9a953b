#include "higcn/config.hpp"

#include "higcn/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace higcn {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, std::string_view value) {
    const std::string v(value);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) {
            throw ConfigError("");
        }
        return out;
    } catch (const std::exception&) {
        throw ConfigError("setting '" + std::string(key) + "': expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("setting '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(value) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("setting '" + std::string(key) + "': expected true/false, got '" + std::string(value) + "'");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_unit(const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(name) + " must lie in [0, 1], got " + format_double(v));
    }
}

}  // namespace

EncoderMode parse_encoder_mode(std::string_view s) {
    if (s == "precomputed") return EncoderMode::precomputed;
    if (s == "toy") return EncoderMode::toy;
    throw ConfigError("unknown encoder mode '" + std::string(s) + "' (expected toy|precomputed)");
}

std::string_view to_string(EncoderMode m) {
    return m == EncoderMode::toy ? "toy" : "precomputed";
}

Variant parse_variant(std::string_view s) {
    if (s == "full") return Variant::full;
    if (s == "NoAttribute") return Variant::no_attribute;
    if (s == "NoSyntax") return Variant::no_syntax;
    if (s == "NoSemantics") return Variant::no_semantics;
    if (s == "NoHIG2CN" || s == "NoHIG²CN") return Variant::no_hig2cn;
    if (s == "NoContextGating") return Variant::no_context_gating;
    if (s == "NoTargetGating") return Variant::no_target_gating;
    throw ConfigError("unknown variant '" + std::string(s) + "'");
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_attribute: return "NoAttribute";
        case Variant::no_syntax: return "NoSyntax";
        case Variant::no_semantics: return "NoSemantics";
        case Variant::no_hig2cn: return "NoHIG2CN";
        case Variant::no_context_gating: return "NoContextGating";
        case Variant::no_target_gating: return "NoTargetGating";
    }
    return "?";
}

const std::vector<Variant>& ablation_variants() {
    static const std::vector<Variant> all = {Variant::no_attribute,     Variant::no_syntax,
                                             Variant::no_semantics,     Variant::no_hig2cn,
                                             Variant::no_context_gating, Variant::no_target_gating};
    return all;
}

Selection parse_selection(std::string_view s) {
    if (s == "final") return Selection::final_epoch;
    if (s == "best_train_loss") return Selection::best_train_loss;
    throw ConfigError("unknown selection '" + std::string(s) + "' (expected final|best_train_loss)");
}

std::string_view to_string(Selection s) {
    return s == Selection::final_epoch ? "final" : "best_train_loss";
}

void validate(const TrainConfig& c) {
    const auto& m = c.model;
    if (m.d == 0) throw ConfigError("d must be positive");
    require_unit("alpha", m.alpha);
    require_unit("lambda", m.lambda);
    if (!(m.dropout >= 0.0 && m.dropout < 1.0)) {
        throw ConfigError("dropout must lie in [0, 1), got " + format_double(m.dropout));
    }
    if (!(m.beta >= 0.0)) throw ConfigError("beta must be non-negative");
    if (m.head_layers == 0) throw ConfigError("head_layers must be at least 1");
    if (m.mode == EncoderMode::toy && m.toy_vocab == 0) throw ConfigError("toy_vocab must be positive");
    if (!(c.lr >= 0.0)) throw ConfigError("lr must be non-negative");
    if (!(c.weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
    if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
}

void apply_setting(TrainConfig& c, std::string_view key, std::string_view value) {
    auto& m = c.model;
    if (key == "lr") c.lr = parse_double(key, value);
    else if (key == "weight_decay") c.weight_decay = parse_double(key, value);
    else if (key == "epochs") c.epochs = parse_uint(key, value);
    else if (key == "batch_size") c.batch_size = parse_uint(key, value);
    else if (key == "seed") c.seed = parse_uint(key, value);
    else if (key == "selection") c.selection = parse_selection(value);
    else if (key == "d") m.d = parse_uint(key, value);
    else if (key == "L") m.layers = parse_uint(key, value);
    else if (key == "alpha") m.alpha = parse_double(key, value);
    else if (key == "beta") m.beta = parse_double(key, value);
    else if (key == "lambda") m.lambda = parse_double(key, value);
    else if (key == "K") m.k = parse_uint(key, value);
    else if (key == "dropout") m.dropout = parse_double(key, value);
    else if (key == "mode") m.mode = parse_encoder_mode(value);
    else if (key == "toy_vocab") m.toy_vocab = parse_uint(key, value);
    else if (key == "head_layers") m.head_layers = parse_uint(key, value);
    else if (key == "share_attribute_projection") m.share_attribute_projection = parse_bool(key, value);
    else if (key == "variant") m.variant = parse_variant(value);
    else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

std::string to_settings_text(const TrainConfig& c) {
    const auto& m = c.model;
    std::ostringstream os;
    os << "lr=" << format_double(c.lr) << '\n'
       << "weight_decay=" << format_double(c.weight_decay) << '\n'
       << "epochs=" << c.epochs << '\n'
       << "batch_size=" << c.batch_size << '\n'
       << "seed=" << c.seed << '\n'
       << "selection=" << to_string(c.selection) << '\n'
       << "d=" << m.d << '\n'
       << "L=" << m.layers << '\n'
       << "alpha=" << format_double(m.alpha) << '\n'
       << "beta=" << format_double(m.beta) << '\n'
       << "lambda=" << format_double(m.lambda) << '\n'
       << "K=" << m.k << '\n'
       << "dropout=" << format_double(m.dropout) << '\n'
       << "mode=" << to_string(m.mode) << '\n'
       << "toy_vocab=" << m.toy_vocab << '\n'
       << "head_layers=" << m.head_layers << '\n'
       << "share_attribute_projection=" << (m.share_attribute_projection ? "true" : "false") << '\n'
       << "variant=" << to_string(m.variant) << '\n';
    return os.str();
}

ParsedSettings parse_settings(std::string_view text, const TrainConfig& base,
                              const std::vector<std::string>& passthrough) {
    ParsedSettings out{base, {}};
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (std::find(passthrough.begin(), passthrough.end(), key) != passthrough.end()) {
            out.extra.emplace_back(key, value);
        } else {
            apply_setting(out.config, key, value);
        }
    }
    return out;
}

ParsedSettings load_settings_file(const std::filesystem::path& path, const TrainConfig& base,
                                  const std::vector<std::string>& passthrough) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_settings(ss.str(), base, passthrough);
}

TrainConfig toy_defaults() {
    TrainConfig c;
    c.model.mode = EncoderMode::toy;
    c.model.d = 16;
    c.model.k = 2;
    c.model.dropout = 0.0;
    c.lr = 5e-3;
    c.weight_decay = 0.0;
    c.epochs = 200;
    c.batch_size = 16;
    c.seed = 7;
    return c;
}

}  // namespace higcn
