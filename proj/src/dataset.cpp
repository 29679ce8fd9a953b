#include "higcn/dataset.hpp"

#include <cctype>

#include "higcn/error.hpp"
#include "higcn/params.hpp"
#include "higcn/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace higcn {

namespace {

using nlohmann::json;

std::filesystem::path sidecar_dir(const std::filesystem::path& dataset_path) {
    return std::filesystem::path(dataset_path.string() + ".states");
}

// Ids may contain path separators; anything outside [A-Za-z0-9._-] is
// written as %XX.
std::string sidecar_name(const std::string& id) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (const char ch : id) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
            out += ch;
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::filesystem::path sidecar_file(const std::filesystem::path& dataset_path, const std::string& id) {
    return sidecar_dir(dataset_path) / (sidecar_name(id) + ".bin");
}

template <typename T>
T field(const json& record, const std::string& id, const char* key) {
    if (!record.contains(key)) {
        throw ValidationError(id, key, "missing");
    }
    try {
        return record.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(id, key, std::string("wrong type: ") + e.what());
    }
}

Sample sample_from_json(const json& record, std::size_t line_no) {
    if (!record.is_object()) {
        throw ValidationError("line " + std::to_string(line_no), "record", "not a JSON object");
    }
    const auto id = field<std::string>(record, "line " + std::to_string(line_no), "id");
    if (id.empty()) {
        throw ValidationError("line " + std::to_string(line_no), "id", "empty");
    }
    Sample s;
    s.id = id;
    try {
        s.domain = parse_domain(field<std::string>(record, id, "domain"));
    } catch (const ConfigError& e) {
        throw ValidationError(id, "domain", e.what());
    }
    try {
        s.label = parse_label(field<std::string>(record, id, "label"));
    } catch (const ConfigError& e) {
        throw ValidationError(id, "label", e.what());
    }
    s.context_tokens = field<std::vector<std::string>>(record, id, "context_tokens");
    s.target_start = field<std::size_t>(record, id, "target_start");
    s.target_len = field<std::size_t>(record, id, "target_len");
    s.attributes = field<std::vector<std::string>>(record, id, "attributes");
    const auto edges = field<std::vector<std::vector<std::size_t>>>(record, id, "syntax_edges");
    for (const auto& e : edges) {
        if (e.size() != 2) {
            throw ValidationError(id, "syntax_edges", "each edge must be a pair");
        }
        s.syntax_edges.emplace_back(e[0], e[1]);
    }
    if (record.contains("precomputed") && !record.at("precomputed").is_boolean()) {
        throw ValidationError(id, "precomputed", "must be a boolean");
    }
    return s;
}

PrecomputedStates read_states(const std::filesystem::path& file, const std::string& id) {
    std::ifstream is(file, std::ios::binary);
    if (!is) {
        throw ValidationError(id, "precomputed", "sidecar '" + file.string() + "' not found");
    }
    try {
        PrecomputedStates st;
        st.context = read_matrix(is);
        st.cls = read_matrix(is);
        st.attributes = read_matrix(is);
        return st;
    } catch (const IoError& e) {
        throw ValidationError(id, "precomputed", e.what());
    }
}

std::pair<std::string, Split> name_and_split(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    const auto cut = stem.rfind('_');
    if (cut != std::string::npos) {
        const std::string suffix = stem.substr(cut + 1);
        if (suffix == "train" || suffix == "test") {
            return {stem.substr(0, cut), parse_split(suffix)};
        }
    }
    return {stem, Split::train};
}

}  // namespace

std::string_view to_string(Domain d) {
    return d == Domain::laptop ? "laptop" : "restaurant";
}

std::string_view to_string(Label l) {
    switch (l) {
        case Label::positive: return "positive";
        case Label::neutral: return "neutral";
        case Label::negative: return "negative";
    }
    return "?";
}

std::string_view to_string(Split s) {
    return s == Split::train ? "train" : "test";
}

Domain parse_domain(std::string_view s) {
    if (s == "laptop") return Domain::laptop;
    if (s == "restaurant") return Domain::restaurant;
    throw ConfigError("unknown domain '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
    if (s == "positive") return Label::positive;
    if (s == "neutral") return Label::neutral;
    if (s == "negative") return Label::negative;
    throw ConfigError("unknown label '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ConfigError("unknown split '" + std::string(s) + "'");
}

SynthMode parse_synth_mode(std::string_view s) {
    if (s == "plain") return SynthMode::plain;
    if (s == "attribute-coded" || s == "attribute_coded") return SynthMode::attribute_coded;
    throw ConfigError("unknown synth mode '" + std::string(s) + "'");
}

void validate(const Sample& s) {
    const std::size_t nc = s.context_size();
    if (s.id.empty()) {
        throw ValidationError("<unnamed>", "id", "empty");
    }
    if (nc == 0) {
        throw ValidationError(s.id, "context_tokens", "empty context");
    }
    if (s.target_len < 1) {
        throw ValidationError(s.id, "target_len", "must be at least 1");
    }
    if (s.target_start + s.target_len > nc) {
        throw ValidationError(s.id, "target_start", "target span [" + std::to_string(s.target_start) + ", " +
                                                        std::to_string(s.target_start + s.target_len) +
                                                        ") exceeds context length " + std::to_string(nc));
    }
    for (const auto& [i, j] : s.syntax_edges) {
        if (i >= nc || j >= nc) {
            throw ValidationError(s.id, "syntax_edges", "edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                                            ") out of range for " + std::to_string(nc) + " tokens");
        }
        if (i == j) {
            throw ValidationError(s.id, "syntax_edges", "self edge at " + std::to_string(i));
        }
    }
    if (s.precomputed) {
        const auto& p = *s.precomputed;
        const std::size_t d = p.context.cols();
        if (d == 0) {
            throw ValidationError(s.id, "precomputed", "context states have zero width");
        }
        if (p.context.rows() != nc) {
            throw ValidationError(s.id, "precomputed", "context states have " + std::to_string(p.context.rows()) +
                                                           " rows for " + std::to_string(nc) + " tokens");
        }
        if (p.cls.rows() != 1 || p.cls.cols() != d) {
            throw ValidationError(s.id, "precomputed", "cls state is " + p.cls.shape_string());
        }
        if (p.attributes.rows() != s.attributes.size() || (p.attributes.rows() > 0 && p.attributes.cols() != d)) {
            throw ValidationError(s.id, "precomputed", "attribute states are " + p.attributes.shape_string() +
                                                           " for " + std::to_string(s.attributes.size()) +
                                                           " attributes");
        }
        if (!all_finite(p.context) || !all_finite(p.cls) || !all_finite(p.attributes)) {
            throw ValidationError(s.id, "precomputed", "non-finite state");
        }
    }
}

ClassCounts count_labels(const std::vector<Sample>& samples) {
    ClassCounts counts{};
    for (const auto& s : samples) {
        ++counts[static_cast<std::size_t>(s.label)];
    }
    return counts;
}

std::optional<ClassCounts> reference_statistics(std::string_view name, Split split) {
    const bool train = split == Split::train;
    if (name == "laptop14") return train ? ClassCounts{994, 464, 870} : ClassCounts{341, 169, 128};
    if (name == "restaurant14") return train ? ClassCounts{2164, 637, 807} : ClassCounts{728, 196, 196};
    if (name == "restaurant15") return train ? ClassCounts{912, 36, 256} : ClassCounts{326, 34, 182};
    return std::nullopt;
}

std::string sample_to_json_line(const Sample& s) {
    json edges = json::array();
    for (const auto& [i, j] : s.syntax_edges) {
        edges.push_back({i, j});
    }
    json record = {
        {"id", s.id},
        {"domain", std::string(to_string(s.domain))},
        {"context_tokens", s.context_tokens},
        {"target_start", s.target_start},
        {"target_len", s.target_len},
        {"label", std::string(to_string(s.label))},
        {"attributes", s.attributes},
        {"syntax_edges", edges},
        {"precomputed", s.precomputed.has_value()},
    };
    return record.dump();
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset '" + path.string() + "'");
    }
    Dataset ds;
    std::tie(ds.name, ds.split) = name_and_split(path);

    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("line " + std::to_string(line_no), "record", e.what());
        }
        Sample s = sample_from_json(record, line_no);
        if (!seen.insert(s.id).second) {
            throw ValidationError(s.id, "id", "duplicate id");
        }
        if (record.value("precomputed", false)) {
            s.precomputed = read_states(sidecar_file(path, s.id), s.id);
        }
        validate(s);
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) {
        throw Error("validation", "empty dataset: '" + path.string() + "'");
    }
    ds.class_counts = count_labels(ds.samples);
    return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    for (const auto& s : dataset.samples) {
        out << sample_to_json_line(s) << '\n';
        if (s.precomputed) {
            std::filesystem::create_directories(sidecar_dir(path));
            std::ofstream bin(sidecar_file(path, s.id), std::ios::binary);
            if (!bin) {
                throw IoError("cannot write sidecar for sample '" + s.id + "'");
            }
            write_matrix(bin, s.precomputed->context);
            write_matrix(bin, s.precomputed->cls);
            write_matrix(bin, s.precomputed->attributes);
        }
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

Matrix build_syntax_adjacency(const Sample& s) {
    const std::size_t nc = s.context_size();
    Matrix a(nc, nc);
    for (std::size_t i = 0; i < nc; ++i) {
        a(i, i) = 1.0;
    }
    for (const auto& [i, j] : s.syntax_edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    for (std::size_t i = s.target_start; i < s.target_start + s.target_len; ++i) {
        for (std::size_t j = s.target_start; j < s.target_start + s.target_len; ++j) {
            a(i, j) = 1.0;
        }
    }
    return a;
}

Dataset synth_fixture(const SynthOptions& o) {
    using namespace synth_vocab;
    if (o.vocab_size < 8) {
        throw ConfigError("synth: vocab_size must be at least 8");
    }
    if (o.mode == SynthMode::attribute_coded && o.k == 0) {
        throw ConfigError("synth: attribute-coded mode needs K >= 1");
    }
    if (o.nc_min < 2 || o.nc_max < o.nc_min) {
        throw ConfigError("synth: context length range must satisfy 2 <= nc_min <= nc_max");
    }

    Rng rng(o.seed, 0x53594e54);  // "SYNT"
    const std::size_t fillers = o.vocab_size - kCueWords.size();
    auto filler_word = [&] { return "w" + std::to_string(kCueWords.size() + rng.below(fillers)); };
    auto filler_attribute = [&] { return "a" + std::to_string(kCodeWords.size() + rng.below(kFillerAttributes)); };

    Dataset ds;
    ds.name = o.mode == SynthMode::plain ? "synth" : "synth_coded";
    ds.split = Split::train;
    for (std::size_t n = 0; n < o.n_samples; ++n) {
        Sample s;
        s.id = "synth-" + std::to_string(o.seed) + "-" + std::to_string(n);
        s.domain = o.domain;

        const std::size_t nc = o.nc_min + rng.below(o.nc_max - o.nc_min + 1);
        s.target_len = 1 + rng.below(std::min<std::size_t>(2, nc - 1));
        s.target_start = rng.below(nc - s.target_len + 1);

        std::vector<std::size_t> cue_slots;
        for (std::size_t j = 0; j < nc; ++j) {
            if (s.in_target(j)) {
                continue;
            }
            const std::size_t dist = j < s.target_start ? s.target_start - j : j - (s.target_start + s.target_len - 1);
            if (dist <= kCueRadius) {
                cue_slots.push_back(j);
            }
        }
        const std::size_t cue_pos = cue_slots[rng.below(cue_slots.size())];
        const std::size_t cue_class = rng.below(kNumClasses);

        s.context_tokens.resize(nc);
        for (std::size_t j = 0; j < nc; ++j) {
            s.context_tokens[j] = j == cue_pos ? std::string(kCueWords[cue_class]) : filler_word();
        }

        std::size_t code = 0;
        for (std::size_t a = 0; a < o.k; ++a) {
            if (a == 0 && o.mode == SynthMode::attribute_coded) {
                code = rng.below(kNumClasses);
                s.attributes.emplace_back(kCodeWords[code]);
            } else {
                s.attributes.push_back(filler_attribute());
            }
        }
        s.label = static_cast<Label>((cue_class + code) % kNumClasses);

        // Spanning tree: target tokens chained, cue attached to the head of
        // the target, every other token hung off a random earlier tree node.
        std::vector<std::size_t> in_tree;
        for (std::size_t j = s.target_start; j < s.target_start + s.target_len; ++j) {
            if (!in_tree.empty()) {
                s.syntax_edges.emplace_back(in_tree.back(), j);
            }
            in_tree.push_back(j);
        }
        s.syntax_edges.emplace_back(s.target_start, cue_pos);
        in_tree.push_back(cue_pos);
        std::vector<std::size_t> rest;
        for (std::size_t j = 0; j < nc; ++j) {
            if (!s.in_target(j) && j != cue_pos) {
                rest.push_back(j);
            }
        }
        rng.shuffle(std::span<std::size_t>(rest));
        for (std::size_t j : rest) {
            s.syntax_edges.emplace_back(in_tree[rng.below(in_tree.size())], j);
            in_tree.push_back(j);
        }
        for (auto& [i, j] : s.syntax_edges) {
            if (i > j) {
                std::swap(i, j);
            }
        }
        std::sort(s.syntax_edges.begin(), s.syntax_edges.end());

        validate(s);
        ds.samples.push_back(std::move(s));
    }
    ds.class_counts = count_labels(ds.samples);
    return ds;
}

}  // namespace higcn
