#pragma once

#include "higcn/dataset.hpp"
#include "higcn/matrix.hpp"
#include "higcn/tape.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace higcn {

enum class NodeKind { context, target, attribute };

std::string_view to_string(NodeKind k);

// Heterogeneous information graph over Nc context nodes followed by K
// attribute nodes. Receiver-row convention: adjacency(i, j) is the weight of
// the edge carrying node j's state into node i.
struct HIGraph {
    std::size_t context_nodes = 0;
    std::size_t attribute_nodes = 0;
    Matrix adjacency;
    std::vector<NodeKind> kinds;
    double alpha = 0.0;
    double beta = 0.0;

    std::size_t size() const noexcept { return context_nodes + attribute_nodes; }
};

// alpha * syntax + (1 - alpha) * semantic, entrywise.
Matrix merge_graphs(const Matrix& syntax, const Matrix& semantic, double alpha);

// Non-target context nodes that share a syntax edge with some target node.
std::vector<std::size_t> target_neighbors(const Sample& sample, const Matrix& syntax);

// N x N matrix holding only what the attribute nodes add: weight beta from
// every attribute into every target node and every syntactic neighbour of the
// target, and a unit self-loop on each attribute node. No edge ever points
// into an attribute node from another node.
Matrix attribute_overlay(const Sample& sample, const Matrix& syntax, std::size_t attribute_count, double beta);

// Attaches `attribute_count` attribute nodes to a merged context block.
HIGraph attach_attributes(const Matrix& context_block, const Sample& sample, const Matrix& syntax,
                          double beta, std::size_t attribute_count, double alpha = 0.5);

// Weighted in-row sums, self-loops included.
std::vector<double> degree_vector(const HIGraph& graph);

std::vector<NodeKind> node_kinds(const Sample& sample, std::size_t attribute_count);

// Text dump: one line per node, `<id> <kind> <col>:<weight> ...` over the
// nonzero entries of its row.
std::string inspect(const HIGraph& graph);

// Graph whose context block depends on a differentiable attention matrix.
struct TapeGraph {
    Var adjacency;
    std::size_t context_nodes = 0;
    std::size_t attribute_nodes = 0;

    std::size_t size() const noexcept { return context_nodes + attribute_nodes; }
};

TapeGraph build_hig_on_tape(Tape& tape, const Sample& sample, const Matrix& syntax, Var semantic,
                            double alpha, double beta, std::size_t attribute_count);

// Wraps a fixed graph as a tape constant.
TapeGraph constant_graph(Tape& tape, const HIGraph& graph);

}  // namespace higcn
