#include "higcn/tape.hpp"

#include "higcn/error.hpp"

#include <algorithm>
#include <cmath>

namespace higcn {

namespace {

void require_same(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " + b.shape_string());
    }
}

}  // namespace

Var Tape::push(Matrix value, bool requires_grad, Backprop backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) {
        n.backprop = std::move(backprop);
    }
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

bool Tape::any_requires(std::initializer_list<Var> vs) const {
    return std::any_of(vs.begin(), vs.end(), [this](Var v) { return nodes_.at(v.id).requires_grad; });
}

void Tape::accumulate(Var v, const Matrix& g) {
    Node& n = node(v);
    if (!n.requires_grad) {
        return;
    }
    add_in_place(n.grad, g);
}

Var Tape::constant(Matrix value) {
    return push(std::move(value), false, {});
}

Var Tape::param(const std::string& name) {
    if (const auto it = param_nodes_.find(name); it != param_nodes_.end()) {
        return Var{it->second};
    }
    if (params_ == nullptr) {
        throw ConfigError("tape has no parameter registry (requested '" + name + "')");
    }
    const Var v = push(params_->at(name), true, [](Tape&, const Matrix&) {});
    param_nodes_.emplace(name, v.id);
    return v;
}

double Tape::scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.rows() != 1 || m.cols() != 1) {
        throw ShapeError("scalar: node is " + m.shape_string());
    }
    return m(0, 0);
}

void Tape::backward(Var output) {
    const Matrix& out = value(output);
    if (out.rows() != 1 || out.cols() != 1) {
        throw ShapeError("backward: output must be 1x1, got " + out.shape_string());
    }
    for (Node& n : nodes_) {
        n.grad = n.requires_grad ? Matrix(n.value.rows(), n.value.cols()) : Matrix();
    }
    if (!node(output).requires_grad) {
        return;
    }
    node(output).grad(0, 0) = 1.0;
    for (std::size_t i = output.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.backprop) {
            n.backprop(*this, n.grad);
        }
    }
}

ParamStore Tape::parameter_gradients() const {
    ParamStore out;
    for (const auto& [name, id] : param_nodes_) {
        const Node& n = nodes_[id];
        out.set(name, n.grad.same_shape(n.value) ? n.grad : Matrix(n.value.rows(), n.value.cols()));
    }
    return out;
}

Var Tape::matmul(Var a, Var b) {
    Matrix v = higcn::matmul(value(a), value(b));
    return push(std::move(v), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a)) {
            t.accumulate(a, higcn::matmul_nt(g, t.value(b)));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, matmul_tn(t.value(a), g));
        }
    });
}

Var Tape::matmul_nt(Var a, Var b) {
    Matrix v = higcn::matmul_nt(value(a), value(b));
    return push(std::move(v), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        if (t.requires_grad(a)) {
            t.accumulate(a, higcn::matmul(g, t.value(b)));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, matmul_tn(g, t.value(a)));
        }
    });
}

Var Tape::add(Var a, Var b) {
    require_same(value(a), value(b), "add");
    Matrix v = higcn::add(value(a), value(b));
    return push(std::move(v), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var Tape::sub(Var a, Var b) {
    require_same(value(a), value(b), "sub");
    Matrix v = higcn::add(value(a), scaled(value(b), -1.0));
    return push(std::move(v), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        if (t.requires_grad(b)) {
            t.accumulate(b, scaled(g, -1.0));
        }
    });
}

Var Tape::hadamard(Var a, Var b) {
    require_same(value(a), value(b), "hadamard");
    Matrix v = value(a);
    const auto bv = value(b).data();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v.data()[i] *= bv[i];
    }
    return push(std::move(v), any_requires({a, b}), [a, b](Tape& t, const Matrix& g) {
        for (const auto& [self, other] : {std::pair{a, b}, std::pair{b, a}}) {
            if (!t.requires_grad(self)) {
                continue;
            }
            Matrix d = g;
            const auto o = t.value(other).data();
            for (std::size_t i = 0; i < d.size(); ++i) {
                d.data()[i] *= o[i];
            }
            t.accumulate(self, d);
        }
    });
}

Var Tape::scale(Var a, double s) {
    return push(scaled(value(a), s), any_requires({a}),
                [a, s](Tape& t, const Matrix& g) { t.accumulate(a, scaled(g, s)); });
}

Var Tape::add_scalar(Var a, double s) {
    Matrix v = value(a);
    for (double& x : v.data()) {
        x += s;
    }
    return push(std::move(v), any_requires({a}), [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var Tape::add_row(Var a, Var row) {
    const Matrix& av = value(a);
    const Matrix& rv = value(row);
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw ShapeError("add_row: cannot broadcast " + rv.shape_string() + " over " + av.shape_string());
    }
    Matrix v = av;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        auto r = v.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            r[j] += rv(0, j);
        }
    }
    return push(std::move(v), any_requires({a, row}), [a, row](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        if (t.requires_grad(row)) {
            Matrix d(1, g.cols());
            for (std::size_t i = 0; i < g.rows(); ++i) {
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    d(0, j) += g(i, j);
                }
            }
            t.accumulate(row, d);
        }
    });
}

Var Tape::mul_rows(Var a, Var column) {
    const Matrix& av = value(a);
    const Matrix& cv = value(column);
    if (cv.cols() != 1 || cv.rows() != av.rows()) {
        throw ShapeError("mul_rows: column " + cv.shape_string() + " does not match " + av.shape_string());
    }
    Matrix v = av;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        for (double& x : v.row(i)) {
            x *= cv(i, 0);
        }
    }
    return push(std::move(v), any_requires({a, column}), [a, column](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        const Matrix& cv = t.value(column);
        if (t.requires_grad(a)) {
            Matrix d = g;
            for (std::size_t i = 0; i < d.rows(); ++i) {
                for (double& x : d.row(i)) {
                    x *= cv(i, 0);
                }
            }
            t.accumulate(a, d);
        }
        if (t.requires_grad(column)) {
            Matrix d(cv.rows(), 1);
            for (std::size_t i = 0; i < g.rows(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) {
                    acc += g(i, j) * av(i, j);
                }
                d(i, 0) = acc;
            }
            t.accumulate(column, d);
        }
    });
}

Var Tape::reciprocal(Var a) {
    Matrix v = value(a);
    for (double& x : v.data()) {
        if (x == 0.0) {
            throw NumericError("reciprocal: division by zero");
        }
        x = 1.0 / x;
    }
    return push(std::move(v), any_requires({a}), [a](Tape& t, const Matrix& g) {
        Matrix d = g;
        const auto av = t.value(a).data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            d.data()[i] *= -1.0 / (av[i] * av[i]);
        }
        t.accumulate(a, d);
    });
}

std::uint64_t Tape::relu_signature() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::size_t id : relu_inputs_) {
        for (const double x : nodes_[id].value.data()) {
            h ^= x > 0.0 ? 0x9dU : 0x3bU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

Var Tape::relu(Var a) {
    relu_inputs_.push_back(a.id);
    Matrix v = value(a);
    for (double& x : v.data()) {
        x = x > 0.0 ? x : 0.0;
    }
    return push(std::move(v), any_requires({a}), [a](Tape& t, const Matrix& g) {
        Matrix d = g;
        const auto av = t.value(a).data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!(av[i] > 0.0)) {
                d.data()[i] = 0.0;
            }
        }
        t.accumulate(a, d);
    });
}

Var Tape::sigmoid(Var a) {
    Matrix v = value(a);
    for (double& x : v.data()) {
        x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    const Var out = push(std::move(v), any_requires({a}), {});
    if (requires_grad(out)) {
        node(out).backprop = [a, out](Tape& t, const Matrix& g) {
            Matrix d = g;
            const auto s = t.value(out).data();
            for (std::size_t i = 0; i < d.size(); ++i) {
                d.data()[i] *= s[i] * (1.0 - s[i]);
            }
            t.accumulate(a, d);
        };
    }
    return out;
}

Var Tape::softmax_rows(Var a) {
    const Var out = push(higcn::softmax_rows(value(a)), any_requires({a}), {});
    if (requires_grad(out)) {
        node(out).backprop = [a, out](Tape& t, const Matrix& g) {
            const Matrix& s = t.value(out);
            Matrix d(s.rows(), s.cols());
            for (std::size_t i = 0; i < s.rows(); ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < s.cols(); ++j) {
                    dot += g(i, j) * s(i, j);
                }
                for (std::size_t j = 0; j < s.cols(); ++j) {
                    d(i, j) = s(i, j) * (g(i, j) - dot);
                }
            }
            t.accumulate(a, d);
        };
    }
    return out;
}

Var Tape::concat_cols(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.rows() != bv.rows()) {
        throw ShapeError("concat_cols: " + av.shape_string() + " and " + bv.shape_string());
    }
    const std::size_t ca = av.cols();
    Matrix v(av.rows(), ca + bv.cols());
    for (std::size_t i = 0; i < v.rows(); ++i) {
        std::copy(av.row(i).begin(), av.row(i).end(), v.row(i).begin());
        std::copy(bv.row(i).begin(), bv.row(i).end(), v.row(i).begin() + static_cast<std::ptrdiff_t>(ca));
    }
    return push(std::move(v), any_requires({a, b}), [a, b, ca](Tape& t, const Matrix& g) {
        const std::size_t cb = g.cols() - ca;
        if (t.requires_grad(a)) {
            Matrix d(g.rows(), ca);
            for (std::size_t i = 0; i < g.rows(); ++i) {
                std::copy_n(g.row(i).begin(), ca, d.row(i).begin());
            }
            t.accumulate(a, d);
        }
        if (t.requires_grad(b)) {
            Matrix d(g.rows(), cb);
            for (std::size_t i = 0; i < g.rows(); ++i) {
                std::copy_n(g.row(i).begin() + static_cast<std::ptrdiff_t>(ca), cb, d.row(i).begin());
            }
            t.accumulate(b, d);
        }
    });
}

Var Tape::concat_rows(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols() != bv.cols()) {
        throw ShapeError("concat_rows: " + av.shape_string() + " and " + bv.shape_string());
    }
    std::vector<double> data(av.data().begin(), av.data().end());
    data.insert(data.end(), bv.data().begin(), bv.data().end());
    const std::size_t ra = av.rows();
    Matrix v(ra + bv.rows(), av.cols(), std::move(data));
    return push(std::move(v), any_requires({a, b}), [a, b, ra](Tape& t, const Matrix& g) {
        const std::size_t split = ra * g.cols();
        if (t.requires_grad(a)) {
            t.accumulate(a, Matrix(ra, g.cols(), std::vector<double>(g.data().begin(), g.data().begin() + static_cast<std::ptrdiff_t>(split))));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, Matrix(g.rows() - ra, g.cols(),
                                   std::vector<double>(g.data().begin() + static_cast<std::ptrdiff_t>(split), g.data().end())));
        }
    });
}

Var Tape::broadcast_rows(Var row, std::size_t n) {
    const Matrix& rv = value(row);
    if (rv.rows() != 1) {
        throw ShapeError("broadcast_rows: expected a row, got " + rv.shape_string());
    }
    Matrix v(n, rv.cols());
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(rv.data().begin(), rv.data().end(), v.row(i).begin());
    }
    return push(std::move(v), any_requires({row}), [row](Tape& t, const Matrix& g) {
        Matrix d(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i) {
            for (std::size_t j = 0; j < g.cols(); ++j) {
                d(0, j) += g(i, j);
            }
        }
        t.accumulate(row, d);
    });
}

Var Tape::slice_rows(Var a, std::size_t begin, std::size_t count) {
    const Matrix& av = value(a);
    if (begin + count > av.rows()) {
        throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + av.shape_string());
    }
    const auto first = av.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols());
    Matrix v(count, av.cols(), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * av.cols())));
    return push(std::move(v), any_requires({a}), [a, begin](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix d(av.rows(), av.cols());
        std::copy(g.data().begin(), g.data().end(),
                  d.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols()));
        t.accumulate(a, d);
    });
}

Var Tape::mean_rows(Var a, std::size_t begin, std::size_t count) {
    const Matrix& av = value(a);
    if (count == 0 || begin + count > av.rows()) {
        throw ShapeError("mean_rows: invalid span [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") for " + av.shape_string());
    }
    Matrix v(1, av.cols());
    for (std::size_t i = begin; i < begin + count; ++i) {
        for (std::size_t j = 0; j < av.cols(); ++j) {
            v(0, j) += av(i, j);
        }
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (double& x : v.data()) {
        x *= inv;
    }
    return push(std::move(v), any_requires({a}), [a, begin, count, inv](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix d(av.rows(), av.cols());
        for (std::size_t i = begin; i < begin + count; ++i) {
            for (std::size_t j = 0; j < av.cols(); ++j) {
                d(i, j) = g(0, j) * inv;
            }
        }
        t.accumulate(a, d);
    });
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> indices) {
    const Matrix& tv = value(table);
    Matrix v(indices.size(), tv.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= tv.rows()) {
            throw ShapeError("gather_rows: index " + std::to_string(indices[i]) + " out of range for " +
                             tv.shape_string());
        }
        std::copy(tv.row(indices[i]).begin(), tv.row(indices[i]).end(), v.row(i).begin());
    }
    return push(std::move(v), any_requires({table}), [table, idx = std::move(indices)](Tape& t, const Matrix& g) {
        const Matrix& tv = t.value(table);
        Matrix d(tv.rows(), tv.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            for (std::size_t j = 0; j < tv.cols(); ++j) {
                d(idx[i], j) += g(i, j);
            }
        }
        t.accumulate(table, d);
    });
}

Var Tape::pad(Var a, std::size_t rows, std::size_t cols) {
    const Matrix& av = value(a);
    if (av.rows() > rows || av.cols() > cols) {
        throw ShapeError("pad: " + av.shape_string() + " does not fit in " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    Matrix v(rows, cols);
    for (std::size_t i = 0; i < av.rows(); ++i) {
        std::copy(av.row(i).begin(), av.row(i).end(), v.row(i).begin());
    }
    return push(std::move(v), any_requires({a}), [a](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix d(av.rows(), av.cols());
        for (std::size_t i = 0; i < av.rows(); ++i) {
            std::copy_n(g.row(i).begin(), av.cols(), d.row(i).begin());
        }
        t.accumulate(a, d);
    });
}

Var Tape::row_sum(Var a) {
    const Matrix& av = value(a);
    Matrix v(av.rows(), 1);
    for (std::size_t i = 0; i < av.rows(); ++i) {
        double acc = 0.0;
        for (double x : av.row(i)) {
            acc += x;
        }
        v(i, 0) = acc;
    }
    return push(std::move(v), any_requires({a}), [a](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        Matrix d(av.rows(), av.cols());
        for (std::size_t i = 0; i < av.rows(); ++i) {
            for (double& x : d.row(i)) {
                x = g(i, 0);
            }
        }
        t.accumulate(a, d);
    });
}

Var Tape::sum(Var a) {
    double acc = 0.0;
    for (double x : value(a).data()) {
        acc += x;
    }
    return push(Matrix(1, 1, acc), any_requires({a}), [a](Tape& t, const Matrix& g) {
        const Matrix& av = t.value(a);
        t.accumulate(a, Matrix(av.rows(), av.cols(), g(0, 0)));
    });
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t gold) {
    const Matrix& z = value(logits);
    if (z.rows() != 1 || gold >= z.cols()) {
        throw ShapeError("softmax_cross_entropy: logits " + z.shape_string() + ", gold " + std::to_string(gold));
    }
    const Matrix p = higcn::softmax_rows(z);
    const double peak = *std::max_element(z.data().begin(), z.data().end());
    double total = 0.0;
    for (double x : z.data()) {
        total += std::exp(x - peak);
    }
    const double loss = peak + std::log(total) - z(0, gold);
    return push(Matrix(1, 1, loss), any_requires({logits}), [logits, gold, p](Tape& t, const Matrix& g) {
        Matrix d = p;
        d(0, gold) -= 1.0;
        t.accumulate(logits, scaled(d, g(0, 0)));
    });
}

}  // namespace higcn
