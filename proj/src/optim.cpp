#include "higcn/optim.hpp"

#include "higcn/error.hpp"

#include <algorithm>
#include <cmath>

namespace higcn {

void AdamW::step(ParamStore& params, const ParamStore& grads) {
    if (!(options_.lr >= 0.0)) {
        throw ConfigError("AdamW: learning rate must be non-negative");
    }
    for (const auto& [name, value] : params) {
        if (!grads.contains(name)) {
            throw ShapeError("AdamW: no gradient for parameter '" + name + "'");
        }
        if (!grads.at(name).same_shape(value)) {
            throw ShapeError("AdamW: gradient for parameter '" + name + "' is " + grads.at(name).shape_string() +
                             ", expected " + value.shape_string());
        }
    }
    if (first_moment_.size() == 0) {
        first_moment_ = params.zeros_like();
        second_moment_ = params.zeros_like();
    }

    ++step_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double decay = 1.0 - options_.lr * options_.weight_decay;

    for (auto& [name, value] : params) {
        auto w = value.data();
        const auto g = grads.at(name).data();
        auto m = first_moment_.at(name).data();
        auto v = second_moment_.at(name).data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            w[i] *= decay;
            w[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
        }
    }
}

double gradient_relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<LossAndGrads(const ParamStore&)>& closure,
                           const ParamStore& params,
                           double epsilon) {
    const LossAndGrads baseline = closure(params);
    const LossAndGrads again = closure(params);
    if (baseline.loss != again.loss || baseline.kink_signature != again.kink_signature) {
        throw NumericError("grad_check: closure is not deterministic (baseline losses differ)");
    }

    GradCheckReport report;
    report.worst_param = "";
    ParamStore probe = params;
    for (const auto& [name, value] : params) {
        const Matrix* analytic = baseline.grads.contains(name) ? &baseline.grads.at(name) : nullptr;
        if (analytic != nullptr && !analytic->same_shape(value)) {
            throw ShapeError("grad_check: gradient for '" + name + "' has wrong shape");
        }
        auto slot = probe.at(name).data();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double original = slot[i];
            slot[i] = original + epsilon;
            const LossAndGrads up = closure(probe);
            slot[i] = original - epsilon;
            const LossAndGrads down = closure(probe);
            slot[i] = original;

            if (up.kink_signature != baseline.kink_signature || down.kink_signature != baseline.kink_signature) {
                ++report.entries_skipped;
                continue;
            }
            const double numeric = (up.loss - down.loss) / (2.0 * epsilon);
            const double a = analytic != nullptr ? analytic->data()[i] : 0.0;
            const double err = gradient_relative_error(a, numeric);
            ++report.entries_checked;
            if (err > report.max_rel_error || report.worst_param.empty()) {
                report.max_rel_error = err;
                report.worst_param = name;
                report.worst_index = i;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace higcn
