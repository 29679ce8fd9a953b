#include "higcn/encoder.hpp"

#include "higcn/error.hpp"

#include <cmath>
#include <cstdint>

namespace higcn {

std::size_t toy_row(std::string_view token, std::size_t table_rows) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : token) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h % table_rows);
}

EmbedOutput embed(Tape& tape, const Sample& sample, EncoderMode mode, std::size_t attribute_count,
                  std::optional<Var> toy_table) {
    if (attribute_count > sample.attributes.size()) {
        throw ShapeError("embed: sample '" + sample.id + "' has only " + std::to_string(sample.attributes.size()) +
                         " attributes");
    }
    EmbedOutput out;
    if (mode == EncoderMode::precomputed) {
        if (!sample.precomputed) {
            throw ConfigError("embed: precomputed states requested but sample '" + sample.id + "' has none");
        }
        const auto& p = *sample.precomputed;
        out.h_hat = tape.constant(p.context);
        out.h_cls = tape.constant(p.cls);
        const std::size_t d = p.context.cols();
        Matrix attrs(attribute_count, d);
        for (std::size_t a = 0; a < attribute_count; ++a) {
            for (std::size_t j = 0; j < d; ++j) {
                attrs(a, j) = p.attributes(a, j);
            }
        }
        out.attribute_states = tape.constant(std::move(attrs));
        return out;
    }

    if (!toy_table) {
        throw ConfigError("embed: toy mode needs an embedding table");
    }
    const std::size_t rows = tape.value(*toy_table).rows();
    std::vector<std::size_t> ctx;
    ctx.reserve(sample.context_size());
    for (const auto& tok : sample.context_tokens) {
        ctx.push_back(toy_row(tok, rows));
    }
    out.h_hat = tape.gather_rows(*toy_table, std::move(ctx));
    out.h_cls = tape.mean_rows(out.h_hat, 0, sample.context_size());
    if (attribute_count == 0) {
        out.attribute_states = tape.constant(Matrix(0, tape.value(*toy_table).cols()));
    } else {
        std::vector<std::size_t> attrs;
        for (std::size_t a = 0; a < attribute_count; ++a) {
            attrs.push_back(toy_row(sample.attributes[a], rows));
        }
        out.attribute_states = tape.gather_rows(*toy_table, std::move(attrs));
    }
    return out;
}

AttentionOutput non_local_self_attention(Tape& tape, Var h_hat, Var query, Var key, Var value) {
    const std::size_t d = tape.value(h_hat).cols();
    for (const Var m : {query, key, value}) {
        const Matrix& mv = tape.value(m);
        if (mv.rows() != d || mv.cols() != d) {
            throw ShapeError("non_local_self_attention: projection is " + mv.shape_string() + ", expected " +
                             std::to_string(d) + "x" + std::to_string(d));
        }
    }
    const Var q = tape.matmul(h_hat, query);
    const Var k = tape.matmul(h_hat, key);
    const Var logits = tape.scale(tape.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d)));
    AttentionOutput out;
    out.a_sat = tape.softmax_rows(logits);
    out.h = tape.matmul(tape.matmul(out.a_sat, h_hat), value);
    return out;
}

Var target_representation(Tape& tape, Var h, std::size_t mu, std::size_t n_t) {
    return tape.mean_rows(h, mu, n_t);
}

}  // namespace higcn
