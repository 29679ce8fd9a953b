#pragma once

// Glue between the oracles and the library types, shared by the unit tests
// and the acceptance runner.

#include "oracles.hpp"

#include "higcn/hig2cn.hpp"
#include "higcn/tape.hpp"

#include <filesystem>
#include <string>

namespace support {

inline higcn::Matrix row(const std::vector<double>& v) { return higcn::Matrix::row_vector(v); }

inline oracle::ConvInstance random_conv_instance(higcn::Rng& rng) {
    oracle::ConvInstance x;
    const std::size_t n = 1 + rng.below(12);
    x.k = rng.below(std::min<std::size_t>(n - 1, 3) + 1);
    x.nc = n - x.k;
    x.d = 1 + rng.below(6);
    const std::size_t d = x.d;
    x.h = oracle::random_grid(rng, n, d);
    x.adjacency = oracle::random_grid(rng, n, n, 0.0, 1.0);
    for (auto& r : x.adjacency) {
        for (double& v : r) {
            if (rng.bernoulli(0.4)) v = 0.0;
        }
    }
    x.r_t = oracle::random_vec(rng, d);
    x.h_cls = oracle::random_vec(rng, d);
    x.wt = oracle::random_grid(rng, 2 * d, d);
    x.wc = oracle::random_grid(rng, 2 * d, d);
    x.bt = oracle::random_vec(rng, d);
    x.bc = oracle::random_vec(rng, d);
    x.wa = oracle::random_grid(rng, d, d);
    x.w1 = oracle::random_grid(rng, d, d);
    x.b = oracle::random_vec(rng, d, -0.2, 0.2);
    const std::size_t mu = rng.below(x.nc);
    const std::size_t nt = 1 + rng.below(x.nc - mu);
    x.pos = oracle::position(x.nc, mu, nt);
    x.lambda = rng.uniform();
    x.gate = static_cast<oracle::Gate>(rng.below(4));
    x.use_position = rng.bernoulli(0.75);
    return x;
}

inline higcn::GateMode to_mode(oracle::Gate g) {
    switch (g) {
        case oracle::Gate::co: return higcn::GateMode::co;
        case oracle::Gate::target_only: return higcn::GateMode::target_only;
        case oracle::Gate::context_only: return higcn::GateMode::context_only;
        default: return higcn::GateMode::off;
    }
}

// Runs the library layer on an oracle instance.
inline higcn::Matrix library_conv(const oracle::ConvInstance& x) {
    using oracle::to_matrix;
    higcn::Tape tape;
    const higcn::Var h = tape.constant(to_matrix(x.h));
    higcn::TapeGraph graph{tape.constant(to_matrix(x.adjacency)), x.nc, x.k};
    higcn::LayerParams lp{tape.constant(to_matrix(x.wt)), tape.constant(row(x.bt)),
                          tape.constant(to_matrix(x.wc)), tape.constant(row(x.bc)),
                          tape.constant(to_matrix(x.w1)), tape.constant(row(x.b))};
    const higcn::Var out =
        higcn::hetero_conv_layer(tape, h, graph, tape.constant(row(x.r_t)), tape.constant(row(x.h_cls)), lp,
                                 tape.constant(to_matrix(x.wa)), x.lambda, x.pos,
                                 higcn::ConvOptions{to_mode(x.gate), x.use_position});
    return tape.value(out);
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("higcn-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace support
