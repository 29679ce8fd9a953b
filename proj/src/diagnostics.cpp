#include "higcn/diagnostics.hpp"

namespace higcn {

LossAndGrads model_loss_and_grads(const ModelConfig& config, const ParamStore& params,
                                  std::span<const Sample> samples, const ForwardOverrides& overrides) {
    const Model model(config, params);
    LossAndGrads out;
    out.grads = params.zeros_like();
    ForwardOptions fo;
    fo.overrides = overrides;
    for (const auto& s : samples) {
        ForwardTrace trace = model.forward(s, fo);
        Tape& tape = *trace.tape;
        const Var loss = tape.softmax_cross_entropy(trace.head.logits, static_cast<std::size_t>(s.label));
        out.loss += tape.scalar(loss);
        out.kink_signature = out.kink_signature * 0x100000001b3ULL ^ tape.relu_signature();
        tape.backward(loss);
        out.grads.accumulate(tape.parameter_gradients());
    }
    return out;
}

ToyGradCheck toy_gradcheck_setup(std::uint64_t seed) {
    ToyGradCheck setup;
    setup.config.mode = EncoderMode::toy;
    setup.config.d = 8;
    setup.config.k = 2;
    setup.config.layers = 2;
    setup.config.dropout = 0.0;
    setup.config.toy_vocab = 64;

    SynthOptions so;
    so.seed = seed;
    so.n_samples = 2;
    so.nc_min = 6;
    so.nc_max = 6;
    so.k = 2;
    so.vocab_size = 16;
    setup.data = synth_fixture(so);
    return setup;
}

GradCheckReport toy_gradient_check(std::uint64_t seed, double epsilon) {
    const ToyGradCheck setup = toy_gradcheck_setup(seed);
    const ParamStore params = init_params(setup.config, seed);
    const auto closure = [&](const ParamStore& p) {
        return model_loss_and_grads(setup.config, p, setup.data.samples);
    };
    return grad_check(closure, params, epsilon);
}

}  // namespace higcn
