#pragma once

#include "higcn/matrix.hpp"
#include "higcn/params.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace higcn {

// Handle to a node recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

// Reverse-mode differentiation tape. Nodes are appended in evaluation order,
// so every input precedes its consumer and backward() is a single reverse
// sweep. Each node owns one gradient slot, zeroed at the start of backward().
class Tape {
public:
    explicit Tape(const ParamStore* params = nullptr) : params_(params) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves.
    Var constant(Matrix value);
    // Leaf bound to a registry entry; repeated calls with one name return the
    // same node.
    Var param(const std::string& name);

    const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
    const Matrix& grad(Var v) const { return nodes_.at(v.id).grad; }
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double scalar(Var v) const;

    // Seeds d(output)/d(output) = 1 on a 1x1 node and sweeps backwards.
    void backward(Var output);

    // Gradients of every parameter leaf touched on this tape.
    ParamStore parameter_gradients() const;

    // Hash of the on/off pattern of every ReLU input recorded so far. Two
    // evaluations with equal signatures lie on the same linear piece of every
    // ReLU.
    std::uint64_t relu_signature() const;

    // --- Linear algebra ---
    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a * b^T
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var add_row(Var a, Var row);      // broadcast a 1xC row over every row of a
    Var mul_rows(Var a, Var column);  // out[i][j] = a[i][j] * column[i][0]
    Var reciprocal(Var a);

    // --- Nonlinearities ---
    Var relu(Var a);
    Var sigmoid(Var a);
    Var softmax_rows(Var a);

    // --- Shape manipulation ---
    Var concat_cols(Var a, Var b);
    Var concat_rows(Var a, Var b);
    Var broadcast_rows(Var row, std::size_t n);
    Var slice_rows(Var a, std::size_t begin, std::size_t count);
    Var mean_rows(Var a, std::size_t begin, std::size_t count);  // 1xC
    Var gather_rows(Var table, std::vector<std::size_t> indices);
    Var pad(Var a, std::size_t rows, std::size_t cols);  // a in the top-left block, zeros elsewhere

    // --- Reductions / losses ---
    Var row_sum(Var a);  // Nx1
    Var sum(Var a);      // 1x1
    // -log softmax(logits)[gold] for a 1xS logits row, evaluated via log-sum-exp.
    Var softmax_cross_entropy(Var logits, std::size_t gold);

private:
    using Backprop = std::function<void(Tape&, const Matrix& out_grad)>;

    struct Node {
        Matrix value;
        Matrix grad;
        Backprop backprop;
        bool requires_grad = false;
    };

    Var push(Matrix value, bool requires_grad, Backprop backprop);
    Node& node(Var v) { return nodes_.at(v.id); }
    // Accumulates into the gradient slot of v when it participates in differentiation.
    void accumulate(Var v, const Matrix& g);
    bool any_requires(std::initializer_list<Var> vs) const;

    const ParamStore* params_;
    std::vector<Node> nodes_;
    std::map<std::string, std::size_t> param_nodes_;
    std::vector<std::size_t> relu_inputs_;
};

}  // namespace higcn
