#include "higcn/classifier.hpp"

#include "higcn/error.hpp"

#include <cstdio>
#include <fstream>

namespace higcn {

namespace {

unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
        const unsigned __int128 t = a % b;
        a = b;
        b = t;
    }
    return a == 0 ? 1 : a;
}

}  // namespace

HeadOutput classify(Tape& tape, Var pooled, Var h_cls, const HeadParams& head) {
    if (head.hidden_weights.size() != head.hidden_biases.size()) {
        throw ShapeError("classify: mismatched hidden layer parameters");
    }
    Var x = tape.concat_cols(pooled, h_cls);
    for (std::size_t i = 0; i < head.hidden_weights.size(); ++i) {
        x = tape.relu(tape.add_row(tape.matmul(x, head.hidden_weights[i]), head.hidden_biases[i]));
    }
    HeadOutput out;
    out.logits = tape.add_row(tape.matmul(x, head.output_weight), head.output_bias);
    out.probabilities = tape.softmax_rows(out.logits);
    return out;
}

Label predicted_label(std::span<const double> probabilities) {
    if (probabilities.size() != kNumClasses) {
        throw ShapeError("predicted_label: expected " + std::to_string(kNumClasses) + " probabilities");
    }
    return static_cast<Label>(argmax(probabilities));
}

Metrics metrics_from_confusion(const Confusion& confusion) {
    Metrics m;
    m.confusion = confusion;
    std::size_t correct = 0;
    for (std::size_t g = 0; g < kNumClasses; ++g) {
        for (std::size_t p = 0; p < kNumClasses; ++p) {
            m.total += confusion[g][p];
        }
        correct += confusion[g][g];
    }
    m.accuracy = m.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(m.total);

    // Macro-F1 as one rational sum(2tp_k / den_k) / 3, divided once, so the
    // result is the double nearest the exact value.
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        const std::size_t tp = confusion[k][k];
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t o = 0; o < kNumClasses; ++o) {
            if (o != k) {
                fp += confusion[o][k];
                fn += confusion[k][o];
            }
        }
        const std::size_t class_den = 2 * tp + fp + fn;
        m.per_class_f1[k] = class_den == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(class_den);
        if (class_den != 0) {
            num = num * class_den + den * (2 * tp);
            den *= class_den;
            const unsigned __int128 g = gcd128(num, den);
            num /= g;
            den /= g;
        }
    }
    den *= kNumClasses;
    const unsigned __int128 g = gcd128(num, den);
    m.macro_f1 = static_cast<double>(num / g) / static_cast<double>(den / g);
    return m;
}

Metrics evaluate(const Dataset& dataset, const std::function<Label(const Sample&)>& predictor) {
    if (dataset.samples.empty()) {
        throw ConfigError("evaluate: empty dataset");
    }
    Confusion confusion{};
    for (const auto& s : dataset.samples) {
        const Label predicted = predictor(s);
        ++confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(predicted)];
    }
    return metrics_from_confusion(confusion);
}

std::string metrics_report(const Metrics& m) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "accuracy=%.17g\nmacro_f1=%.17g\nper_class_f1.pos=%.17g\nper_class_f1.neu=%.17g\n"
                  "per_class_f1.neg=%.17g\n",
                  m.accuracy, m.macro_f1, m.per_class_f1[0], m.per_class_f1[1], m.per_class_f1[2]);
    return buf;
}

void write_metrics_report(const std::filesystem::path& path, const Metrics& metrics) {
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot write metrics to '" + path.string() + "'");
    }
    os << metrics_report(metrics);
}

}  // namespace higcn
