#pragma once

#include "higcn/params.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace higcn {

struct AdamWOptions {
    double lr = 1e-5;
    double weight_decay = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// AdamW with decoupled weight decay: the decay shrinks the weights directly
// (theta -= lr * wd * theta) and never enters the moment estimates.
class AdamW {
public:
    explicit AdamW(AdamWOptions options = {}) : options_(options) {}

    // `grads` must hold an entry of matching shape for every parameter.
    void step(ParamStore& params, const ParamStore& grads);

    std::size_t steps() const noexcept { return step_; }
    const AdamWOptions& options() const noexcept { return options_; }

private:
    AdamWOptions options_;
    ParamStore first_moment_;
    ParamStore second_moment_;
    std::size_t step_ = 0;
};

struct LossAndGrads {
    double loss = 0.0;
    ParamStore grads;
    // Identifies the piecewise-linear region the evaluation landed in (see
    // Tape::relu_signature); 0 when the closure has no kinks to report.
    std::uint64_t kink_signature = 0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t entries_checked = 0;
    // Entries whose +/- epsilon probes changed the kink signature: the central
    // difference straddles a ReLU kink there and is not a valid reference.
    std::size_t entries_skipped = 0;
};

// Relative error used by grad_check: |a - n| / max(|a|, |n|, floor). The floor
// keeps entries whose true gradient is (numerically) zero from dividing
// round-off by round-off.
double gradient_relative_error(double analytic, double numeric, double floor = 1e-6);

// Compares the closure's reverse-mode gradients against central differences
// (f(theta + eps) - f(theta - eps)) / (2 eps) for every entry of every
// parameter in `params`. Entries whose probes cross a kink are skipped and
// counted. Throws NumericError if two baseline evaluations of the closure
// disagree.
GradCheckReport grad_check(const std::function<LossAndGrads(const ParamStore&)>& closure,
                           const ParamStore& params,
                           double epsilon = 1e-4);

}  // namespace higcn
