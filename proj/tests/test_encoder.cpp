#include <doctest.h>

#include "support.hpp"

#include "higcn/encoder.hpp"
#include "higcn/error.hpp"

#include <cmath>

using namespace higcn;

namespace {

Sample tokens(std::vector<std::string> words, std::size_t start = 0, std::size_t len = 1) {
    Sample s;
    s.id = "enc";
    s.context_tokens = std::move(words);
    s.target_start = start;
    s.target_len = len;
    return s;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.uniform(-1, 1);
    return m;
}

}  // namespace

TEST_CASE("toy embedding looks tokens up by hash") {
    Rng rng(1);
    Tape tape;
    const Var table = tape.constant(random_matrix(rng, 16, 4));
    Sample s = tokens({"good", "food", "good"});
    s.attributes = {"tasty", "food"};
    const EmbedOutput e = embed(tape, s, EncoderMode::toy, 2, table);
    const Matrix& h = tape.value(e.h_hat);
    CHECK(h.rows() == 3);
    for (std::size_t c = 0; c < 4; ++c) CHECK(h(0, c) == h(2, c));
    const Matrix& attr = tape.value(e.attribute_states);
    CHECK(attr.rows() == 2);
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(attr(1, c) == h(1, c));
        CHECK(attr(0, c) == tape.value(table)(toy_row("tasty", 16), c));
        CHECK(tape.value(e.h_cls)(0, c) == doctest::Approx((h(0, c) + h(1, c) + h(2, c)) / 3.0).epsilon(1e-15));
    }
    CHECK(toy_row("good", 16) == toy_row("good", 16));
}

TEST_CASE("toy embedding of a single token gives h_cls equal to its row") {
    Rng rng(2);
    Tape tape;
    const Var table = tape.constant(random_matrix(rng, 8, 3));
    const EmbedOutput e = embed(tape, tokens({"only"}), EncoderMode::toy, 0, table);
    CHECK(tape.value(e.h_cls) == tape.value(e.h_hat));
    CHECK(tape.value(e.attribute_states).rows() == 0);
}

TEST_CASE("only the first attribute_count attributes are embedded") {
    Rng rng(3);
    Tape tape;
    const Var table = tape.constant(random_matrix(rng, 8, 3));
    Sample s = tokens({"a", "b"});
    s.attributes = {"x", "y", "z"};
    CHECK(tape.value(embed(tape, s, EncoderMode::toy, 2, table).attribute_states).rows() == 2);
}

TEST_CASE("precomputed states pass through unchanged") {
    Sample s = tokens({"a", "b"});
    s.attributes = {"x"};
    s.precomputed = PrecomputedStates{Matrix::from_rows({{0.1, 0.2}, {0.3, 0.4}}), Matrix::from_rows({{5.0, 6.0}}),
                                      Matrix::from_rows({{7.0, 8.0}})};
    Tape tape;
    const EmbedOutput e = embed(tape, s, EncoderMode::precomputed, 1);
    CHECK(tape.value(e.h_hat) == s.precomputed->context);
    CHECK(tape.value(e.h_cls) == s.precomputed->cls);
    CHECK(tape.value(e.attribute_states) == s.precomputed->attributes);

    Sample missing = tokens({"a"});
    missing.id = "no-states";
    try {
        Tape t2;
        embed(t2, missing, EncoderMode::precomputed, 0);
        FAIL("expected error");
    } catch (const Error& err) {
        CHECK(std::string(err.what()).find("no-states") != std::string::npos);
    }
}

TEST_CASE("attention over a single token") {
    Rng rng(4);
    Tape tape;
    const Matrix hh = random_matrix(rng, 1, 3);
    const Matrix mv = random_matrix(rng, 3, 3);
    const AttentionOutput out = non_local_self_attention(tape, tape.constant(hh), tape.constant(random_matrix(rng, 3, 3)),
                                                         tape.constant(random_matrix(rng, 3, 3)), tape.constant(mv));
    CHECK(tape.value(out.a_sat) == Matrix::from_rows({{1.0}}));
    CHECK(max_abs_diff(tape.value(out.h), matmul(hh, mv)) < 1e-15);
}

TEST_CASE("zero query and key projections give uniform attention") {
    Rng rng(5);
    Tape tape;
    const Var zero = tape.constant(Matrix(4, 4));
    const AttentionOutput out =
        non_local_self_attention(tape, tape.constant(random_matrix(rng, 5, 4)), zero, zero, tape.constant(Matrix::identity(4)));
    for (double v : tape.value(out.a_sat).data()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("attention on a 3x4 input with identity projections matches a hand evaluation") {
    const Matrix x = Matrix::from_rows({{0.5, -1.0, 0.25, 2.0}, {1.5, 0.0, -0.5, 0.75}, {-0.25, 1.0, 1.0, -1.0}});
    Tape tape;
    const Var id = tape.constant(Matrix::identity(4));
    const AttentionOutput out = non_local_self_attention(tape, tape.constant(x), id, id, id);
    // softmax(x x^T / sqrt(4)) x, term by term.
    for (std::size_t i = 0; i < 3; ++i) {
        double logits[3];
        double z = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < 4; ++c) dot += x(i, c) * x(j, c);
            logits[j] = std::exp(dot / 2.0);
            z += logits[j];
        }
        for (std::size_t j = 0; j < 3; ++j) CHECK(tape.value(out.a_sat)(i, j) == doctest::Approx(logits[j] / z).epsilon(1e-14));
        for (std::size_t c = 0; c < 4; ++c) {
            double v = 0.0;
            for (std::size_t j = 0; j < 3; ++j) v += logits[j] / z * x(j, c);
            CHECK(tape.value(out.h)(i, c) == doctest::Approx(v).epsilon(1e-14));
        }
    }
}

TEST_CASE("attention rows sum to one and shape mismatches are rejected") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        const std::size_t d = 1 + rng.below(6);
        Tape tape;
        const AttentionOutput out = non_local_self_attention(
            tape, tape.constant(random_matrix(rng, n, d)), tape.constant(random_matrix(rng, d, d)),
            tape.constant(random_matrix(rng, d, d)), tape.constant(random_matrix(rng, d, d)));
        const Matrix& a = tape.value(out.a_sat);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : a.row(i)) s += v;
            CHECK(std::fabs(s - 1.0) < 1e-9);
        }
    }
    Tape tape;
    CHECK_THROWS_AS(non_local_self_attention(tape, tape.constant(Matrix(2, 3)), tape.constant(Matrix(4, 4)),
                                             tape.constant(Matrix(4, 4)), tape.constant(Matrix(4, 4))),
                    ShapeError);
}

TEST_CASE("target representation examples") {
    Tape tape;
    const Var h = tape.constant(Matrix::from_rows({{1, 0}, {0, 1}, {3, 3}}));
    CHECK(tape.value(target_representation(tape, h, 2, 1)) == Matrix::from_rows({{3, 3}}));
    CHECK(tape.value(target_representation(tape, h, 0, 2)) == Matrix::from_rows({{0.5, 0.5}}));
    const Var same = tape.constant(Matrix::from_rows({{0.1, 0.7}, {0.1, 0.7}}));
    CHECK(tape.value(target_representation(tape, same, 0, 2)) == Matrix::from_rows({{0.1, 0.7}}));
}

TEST_CASE("target representation is unchanged by permuting non-target tokens") {
    Rng rng(8);
    const std::size_t n = 6, d = 3;
    const Matrix x = random_matrix(rng, n, d);
    const Matrix mq = random_matrix(rng, d, d), mk = random_matrix(rng, d, d), mv = random_matrix(rng, d, d);
    // Target span {2, 3}; reorder the rest.
    const std::size_t perm[] = {5, 0, 2, 3, 4, 1};
    Matrix px(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) px(i, c) = x(perm[i], c);
    }
    auto r_t = [&](const Matrix& in) {
        Tape tape;
        const AttentionOutput out = non_local_self_attention(tape, tape.constant(in), tape.constant(mq),
                                                             tape.constant(mk), tape.constant(mv));
        return tape.value(target_representation(tape, out.h, 2, 2));
    };
    CHECK(max_abs_diff(r_t(x), r_t(px)) < 1e-12);
}
