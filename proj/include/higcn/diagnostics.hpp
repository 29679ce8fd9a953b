#pragma once

#include "higcn/config.hpp"
#include "higcn/dataset.hpp"
#include "higcn/model.hpp"
#include "higcn/optim.hpp"

#include <cstdint>
#include <span>

namespace higcn {

// Summed cross-entropy over `samples` (evaluation mode) with reverse-mode
// gradients for every registered parameter.
LossAndGrads model_loss_and_grads(const ModelConfig& config, const ParamStore& params,
                                  std::span<const Sample> samples, const ForwardOverrides& overrides = {});

// The desk-scale gradient check: toy encoder, d=8, Nc=6, K=2, L=2, dropout
// off, two synthetic samples.
struct ToyGradCheck {
    ModelConfig config;
    Dataset data;
};
ToyGradCheck toy_gradcheck_setup(std::uint64_t seed = 7);
GradCheckReport toy_gradient_check(std::uint64_t seed = 7, double epsilon = 1e-4);

inline constexpr double kGradCheckTolerance = 1e-4;

}  // namespace higcn
