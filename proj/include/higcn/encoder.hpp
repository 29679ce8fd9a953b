#pragma once

#include "higcn/config.hpp"
#include "higcn/dataset.hpp"
#include "higcn/tape.hpp"

#include <cstddef>
#include <optional>
#include <string_view>

namespace higcn {

// Row of the toy embedding table a token maps to (FNV-1a hash mod rows).
std::size_t toy_row(std::string_view token, std::size_t table_rows);

struct EmbedOutput {
    Var h_hat;             // Nc x d context states before the attention layer
    Var h_cls;             // 1 x d
    Var attribute_states;  // k x d (k may be 0)
};

// Initial states for a sample. Toy mode looks tokens up in `toy_table`
// (h_cls is the mean of the context rows); precomputed mode passes the
// exported blocks through unchanged. Only the first `attribute_count`
// attributes are used.
EmbedOutput embed(Tape& tape, const Sample& sample, EncoderMode mode, std::size_t attribute_count,
                  std::optional<Var> toy_table = std::nullopt);

struct AttentionOutput {
    Var a_sat;  // Nc x Nc, row-stochastic
    Var h;      // Nc x d
};

// Single-head attention over the whole context:
//   A = softmax((H^ Mq)(H^ Mk)^T / sqrt(d)),  H = A H^ Mv
AttentionOutput non_local_self_attention(Tape& tape, Var h_hat, Var query, Var key, Var value);

// Mean of rows [mu, mu + n_t) of h.
Var target_representation(Tape& tape, Var h, std::size_t mu, std::size_t n_t);

struct EncoderOutput {
    Var h_hat;
    Var a_sat;
    Var h;
    Var r_t;
    Var h_cls;
    Var attribute_states;
};

}  // namespace higcn
