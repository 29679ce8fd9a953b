#include <doctest.h>

#include "support.hpp"

#include "higcn/classifier.hpp"
#include "higcn/config.hpp"
#include "higcn/diagnostics.hpp"
#include "higcn/error.hpp"
#include "higcn/model.hpp"

#include <cmath>

using namespace higcn;

namespace {

ModelConfig small_toy(std::size_t layers = 2) {
    ModelConfig c;
    c.mode = EncoderMode::toy;
    c.d = 6;
    c.layers = layers;
    c.k = 2;
    c.dropout = 0.0;
    c.toy_vocab = 40;
    return c;
}

Dataset small_fixture(std::size_t n, SynthMode mode = SynthMode::attribute_coded, std::size_t k = 2, std::uint64_t seed = 3) {
    SynthOptions o;
    o.seed = seed;
    o.n_samples = n;
    o.k = k;
    o.mode = mode;
    o.nc_min = 3;
    o.nc_max = 7;
    o.vocab_size = 16;
    return synth_fixture(o);
}

Confusion confusion_from(std::initializer_list<std::initializer_list<std::size_t>> rows) {
    Confusion c{};
    std::size_t g = 0;
    for (const auto& r : rows) {
        std::size_t p = 0;
        for (std::size_t v : r) c[g][p++] = v;
        ++g;
    }
    return c;
}

}  // namespace

TEST_CASE("zero head predicts uniform probabilities and class 0") {
    Tape tape;
    HeadParams head;
    head.hidden_weights = {tape.constant(Matrix(4, 2))};
    head.hidden_biases = {tape.constant(Matrix(1, 2))};
    head.output_weight = tape.constant(Matrix(2, 3));
    head.output_bias = tape.constant(Matrix(1, 3));
    const HeadOutput out = classify(tape, tape.constant(Matrix::from_rows({{1, -1}})), tape.constant(Matrix::from_rows({{2, 3}})), head);
    for (double p : tape.value(out.probabilities).data()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(predicted_label(tape.value(out.probabilities).data()) == Label::positive);
}

TEST_CASE("head logits [5,0,0] predict class 0 with high confidence") {
    Tape tape;
    HeadParams head;
    head.hidden_weights = {tape.constant(Matrix(2, 1))};
    head.hidden_biases = {tape.constant(Matrix::from_rows({{1.0}}))};
    head.output_weight = tape.constant(Matrix::from_rows({{5, 0, 0}}));
    head.output_bias = tape.constant(Matrix(1, 3));
    const HeadOutput out = classify(tape, tape.constant(Matrix(1, 1)), tape.constant(Matrix(1, 1)), head);
    CHECK(tape.value(out.logits) == Matrix::from_rows({{5, 0, 0}}));
    const auto p = tape.value(out.probabilities).data();
    CHECK(p[0] > 0.97);
    CHECK(predicted_label(p) == Label::positive);
}

TEST_CASE("head probabilities sum to one and argmax ignores a logit shift") {
    Rng rng(50);
    for (int trial = 0; trial < 50; ++trial) {
        Tape tape;
        HeadParams head;
        auto rnd = [&](std::size_t r, std::size_t c) {
            Matrix m(r, c);
            for (double& v : m.data()) v = rng.uniform(-2, 2);
            return m;
        };
        head.hidden_weights = {tape.constant(rnd(6, 3)), tape.constant(rnd(3, 3))};
        head.hidden_biases = {tape.constant(rnd(1, 3)), tape.constant(rnd(1, 3))};
        head.output_weight = tape.constant(rnd(3, 3));
        const Matrix bias = rnd(1, 3);
        head.output_bias = tape.constant(bias);
        const Var pooled = tape.constant(rnd(1, 3));
        const Var cls = tape.constant(rnd(1, 3));
        const HeadOutput a = classify(tape, pooled, cls, head);
        double s = 0.0;
        for (double p : tape.value(a.probabilities).data()) s += p;
        CHECK(std::fabs(s - 1.0) < 1e-12);
        Matrix shifted = bias;
        for (double& v : shifted.data()) v += 3.7;
        head.output_bias = tape.constant(shifted);
        const HeadOutput b = classify(tape, pooled, cls, head);
        CHECK(predicted_label(tape.value(a.probabilities).data()) == predicted_label(tape.value(b.probabilities).data()));
    }
}

TEST_CASE("metrics on the worked confusion matrix") {
    const Metrics m = metrics_from_confusion(confusion_from({{5, 0, 0}, {0, 0, 5}, {0, 0, 5}}));
    CHECK(m.accuracy == 10.0 / 15.0);
    CHECK(m.per_class_f1[0] == 1.0);
    CHECK(m.per_class_f1[1] == 0.0);
    CHECK(m.per_class_f1[2] == 2.0 / 3.0);
    CHECK(m.macro_f1 == 5.0 / 9.0);
    CHECK(m.total == 15);
}

TEST_CASE("metrics edge cases") {
    const Metrics perfect = metrics_from_confusion(confusion_from({{3, 0, 0}, {0, 2, 0}, {0, 0, 4}}));
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    // A class absent from gold and predictions scores 0.
    const Metrics absent = metrics_from_confusion(confusion_from({{3, 0, 0}, {0, 0, 0}, {0, 0, 4}}));
    CHECK(absent.accuracy == 1.0);
    CHECK(absent.macro_f1 == 2.0 / 3.0);
    const Metrics empty = metrics_from_confusion(Confusion{});
    CHECK(empty.accuracy == 0.0);
}

TEST_CASE("evaluate counts predictions and ignores sample order") {
    Dataset ds = small_fixture(30);
    auto predictor = [](const Sample& s) { return s.context_tokens.size() % 2 == 0 ? s.label : Label::neutral; };
    const Metrics a = evaluate(ds, predictor);
    std::reverse(ds.samples.begin(), ds.samples.end());
    CHECK(evaluate(ds, predictor) == a);
    CHECK(a.total == 30);
    auto oracle_pred = [](const Sample& s) { return s.label; };
    CHECK(evaluate(ds, oracle_pred).accuracy == 1.0);
}

TEST_CASE("metrics report keys") {
    const std::string r = metrics_report(metrics_from_confusion(confusion_from({{5, 0, 0}, {0, 0, 5}, {0, 0, 5}})));
    CHECK(r.find("accuracy=") != std::string::npos);
    CHECK(r.find("macro_f1=") != std::string::npos);
    CHECK(r.find("per_class_f1.pos=1\n") != std::string::npos);
    CHECK(r.find("per_class_f1.neu=0\n") != std::string::npos);
    CHECK(r.find("per_class_f1.neg=") != std::string::npos);
}

TEST_CASE("init_params is deterministic with Xavier bounds and zero biases") {
    const ModelConfig c = small_toy();
    const ParamStore a = init_params(c, 5);
    CHECK(a == init_params(c, 5));
    CHECK(!(a == init_params(c, 6)));
    for (const auto& [name, m] : a) {
        const bool bias = name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
        const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (double v : m.data()) {
            if (bias) CHECK(v == 0.0);
            else CHECK(std::fabs(v) <= bound);
        }
    }
    CHECK(a.contains("layer1.gate_context.weight"));
    CHECK(a.at("layer0.gate_target.weight").rows() == 12);
    CHECK(a.contains("attribute_projection"));
    ModelConfig u = c;
    u.share_attribute_projection = false;
    CHECK(init_params(u, 5).contains("layer0.attribute_projection"));
}

TEST_CASE("Model rejects missing or misshapen parameters") {
    const ModelConfig c = small_toy();
    ParamStore p = init_params(c, 1);
    p.erase("head.output.bias");
    CHECK_THROWS_AS(Model(c, p), ConfigError);
    ParamStore q = init_params(c, 1);
    q.set("attention.key", Matrix(2, 2));
    CHECK_THROWS_AS(Model(c, q), ShapeError);
}

TEST_CASE("forward with L=0 pools the encoder states") {
    const Dataset ds = small_fixture(5);
    const ModelConfig c = small_toy(0);
    const Model model(c, init_params(c, 2));
    for (const auto& s : ds.samples) {
        const ForwardTrace t = model.forward(s);
        CHECK(t.layer_states.size() == 1);
        CHECK(t.tape->value(t.pooled) == t.tape->value(t.encoder.r_t));
    }
}

TEST_CASE("forward with L=3 records every layer and stays finite") {
    const Dataset ds = small_fixture(5);
    const ModelConfig c = small_toy(3);
    const Model model(c, init_params(c, 2));
    for (const auto& s : ds.samples) {
        const ForwardTrace t = model.forward(s);
        CHECK(t.layer_states.size() == 4);
        for (const Var v : t.layer_states) {
            CHECK(all_finite(t.tape->value(v)));
            CHECK(t.tape->value(v).rows() == s.context_size() + 2);
        }
        CHECK(all_finite(t.logits()));
    }
}

TEST_CASE("NoAttribute matches beta=0") {
    const Dataset ds = small_fixture(20);
    ModelConfig zero = small_toy(3);
    zero.beta = 0.0;
    ModelConfig none = small_toy(3);
    none.variant = Variant::no_attribute;
    const ParamStore p = init_params(zero, 4);
    const Model a(zero, p), b(none, p);
    for (const auto& s : ds.samples) {
        CHECK(b.attribute_count(s) == 0);
        CHECK(max_abs_diff(a.forward(s).logits(), b.forward(s).logits()) < 1e-6);
    }
}

TEST_CASE("NoAttribute on data without attributes equals the full model") {
    const Dataset ds = small_fixture(10, SynthMode::plain, 0);
    const ModelConfig full = small_toy();
    ModelConfig none = full;
    none.variant = Variant::no_attribute;
    const ParamStore p = init_params(full, 4);
    for (const auto& s : ds.samples) CHECK(Model(full, p).forward(s).logits() == Model(none, p).forward(s).logits());
}

TEST_CASE("NoHIG2CN equals the heterogeneous stack with gates and position weights off when K=0") {
    const Dataset ds = small_fixture(10, SynthMode::plain, 0);
    ModelConfig full = small_toy(3);
    ModelConfig plain = full;
    plain.variant = Variant::no_hig2cn;
    const ParamStore p = init_params(full, 8);
    ForwardOptions off;
    off.overrides.gate = GateMode::off;
    off.overrides.position_weighting = false;
    for (const auto& s : ds.samples) {
        CHECK(max_abs_diff(Model(full, p).forward(s, off).logits(), Model(plain, p).forward(s).logits()) < 1e-10);
    }
}

TEST_CASE("NoContextGating keeps h_cls out of the gate path") {
    const Dataset ds = small_fixture(5);
    ModelConfig c = small_toy(2);
    c.variant = Variant::no_context_gating;
    const Model model(c, init_params(c, 9));
    Rng rng(51);
    for (const auto& s : ds.samples) {
        const ForwardTrace t = model.forward(s);
        StackParams sp;
        for (std::size_t l = 0; l < c.layers; ++l) {
            using param_names::layer;
            sp.layers.push_back(LayerParams{t.tape->param(layer(l, "gate_target.weight")), t.tape->param(layer(l, "gate_target.bias")),
                                            t.tape->param(layer(l, "gate_context.weight")), t.tape->param(layer(l, "gate_context.bias")),
                                            t.tape->param(layer(l, "conv.weight")), t.tape->param(layer(l, "conv.bias"))});
            sp.attribute_projection.push_back(t.tape->param(param_names::kSharedAttributeProjection));
        }
        StackOptions so;
        so.layers = c.layers;
        so.conv.gate = GateMode::target_only;
        EncoderOutput perturbed = t.encoder;
        Matrix cls = t.tape->value(t.encoder.h_cls);
        for (double& v : cls.data()) v += rng.uniform(-5, 5);
        perturbed.h_cls = t.tape->constant(cls);
        const StackOutput out = hig2cn_forward(*t.tape, s, perturbed, t.graph, sp, so);
        CHECK(t.tape->value(out.pooled) == t.tape->value(t.pooled));
    }
}

TEST_CASE("variants change the graph or the gates as configured") {
    const Dataset ds = small_fixture(3);
    const Sample& s = ds.samples[0];
    ModelConfig c = small_toy();
    const ParamStore p = init_params(c, 3);
    const Matrix syntax = build_syntax_adjacency(s);
    c.variant = Variant::no_semantics;
    const HIGraph sem = Model(c, p).graph_for(s);
    CHECK(sem.alpha == 1.0);
    for (std::size_t i = 0; i < s.context_size(); ++i) {
        for (std::size_t j = 0; j < s.context_size(); ++j) CHECK(sem.adjacency(i, j) == syntax(i, j));
    }
    c.variant = Variant::no_syntax;
    const HIGraph syn = Model(c, p).graph_for(s);
    CHECK(syn.alpha == 0.0);
    for (std::size_t i = 0; i < s.context_size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s.context_size(); ++j) row += syn.adjacency(i, j);
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(syn.attribute_nodes == 2);
}

TEST_CASE("K is truncated to the attributes a sample has") {
    ModelConfig c = small_toy();
    c.k = 5;
    const Dataset ds = small_fixture(4, SynthMode::attribute_coded, 3);
    const Model m(c, init_params(c, 1));
    for (const auto& s : ds.samples) {
        CHECK(m.attribute_count(s) == 3);
        CHECK(m.forward(s).tape->value(m.forward(s).layer_states.back()).rows() == s.context_size() + 3);
    }
}

TEST_CASE("batch loss is a sum of cross-entropies") {
    const Dataset ds = small_fixture(2);
    ModelConfig c = small_toy();
    ParamStore p = init_params(c, 1);
    p.at("head.output.weight") = Matrix(c.d, 3);
    const Model m(c, p);
    CHECK(batch_loss(ds.samples, m) == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-14));
    const double one = batch_loss(std::span<const Sample>(ds.samples.data(), 1), m);
    CHECK(one == doctest::Approx(std::log(3.0)).epsilon(1e-14));

    // Perfect prediction: a huge logit on the gold class.
    ParamStore q = p;
    q.at("head.output.bias") = Matrix(1, 3);
    q.at("head.output.bias")(0, static_cast<std::size_t>(ds.samples[0].label)) = 100.0;
    CHECK(batch_loss(std::span<const Sample>(ds.samples.data(), 1), Model(c, q)) < 1e-40);
    CHECK_THROWS(batch_loss(std::span<const Sample>{}, m));
}

TEST_CASE("gradients of model variants match central differences") {
    const Dataset ds = small_fixture(2, SynthMode::attribute_coded, 2, 11);
    std::vector<ModelConfig> configs;
    for (const Variant v : {Variant::full, Variant::no_hig2cn, Variant::no_context_gating, Variant::no_target_gating,
                            Variant::no_syntax}) {
        ModelConfig c = small_toy(2);
        c.d = 4;
        c.toy_vocab = 24;
        c.variant = v;
        configs.push_back(c);
    }
    ModelConfig deep = configs[0];
    deep.head_layers = 2;
    deep.share_attribute_projection = false;
    configs.push_back(deep);
    for (const auto& c : configs) {
        const ParamStore p = init_params(c, 17);
        auto closure = [&](const ParamStore& ps) { return model_loss_and_grads(c, ps, ds.samples); };
        const GradCheckReport rep = grad_check(closure, p);
        INFO("variant ", std::string(to_string(c.variant)), " worst ", rep.worst_param);
        CHECK(rep.max_rel_error < 1e-4);
        CHECK(rep.entries_checked + rep.entries_skipped == p.scalar_count());
    }
}

TEST_CASE("precomputed mode uses the exported states") {
    Sample s;
    s.id = "pre";
    s.context_tokens = {"a", "b", "c"};
    s.target_start = 1;
    s.target_len = 1;
    s.attributes = {"x"};
    s.syntax_edges = {{0, 1}, {1, 2}};
    Rng rng(52);
    auto rnd = [&](std::size_t r) {
        Matrix m(r, 4);
        for (double& v : m.data()) v = rng.uniform(-1, 1);
        return m;
    };
    s.precomputed = PrecomputedStates{rnd(3), rnd(1), rnd(1)};
    ModelConfig c = small_toy();
    c.mode = EncoderMode::precomputed;
    c.d = 4;
    const ParamStore p = init_params(c, 1);
    CHECK(!p.contains(param_names::kEmbedding));
    const ForwardTrace t = Model(c, p).forward(s);
    CHECK(t.tape->value(t.encoder.h_hat) == s.precomputed->context);
    auto closure = [&](const ParamStore& ps) { return model_loss_and_grads(c, ps, std::span<const Sample>(&s, 1)); };
    CHECK(grad_check(closure, p).max_rel_error < 1e-4);
    c.d = 5;
    CHECK_THROWS_AS(Model(c, init_params(c, 1)).forward(s), ConfigError);
}

TEST_CASE("toy gradient check passes") {
    const ToyGradCheck setup = toy_gradcheck_setup();
    CHECK(setup.config.d == 8);
    CHECK(setup.config.layers == 2);
    CHECK(setup.config.k == 2);
    CHECK(setup.config.dropout == 0.0);
    for (const auto& s : setup.data.samples) {
        CHECK(s.context_size() == 6);
        CHECK(s.attributes.size() == 2);
    }
    CHECK(toy_gradient_check().max_rel_error < kGradCheckTolerance);
}
