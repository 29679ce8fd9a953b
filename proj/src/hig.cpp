#include "higcn/hig.hpp"

#include "higcn/error.hpp"

#include <cstdio>
#include <sstream>

namespace higcn {

std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::context: return "context";
        case NodeKind::target: return "target";
        case NodeKind::attribute: return "attribute";
    }
    return "?";
}

Matrix merge_graphs(const Matrix& syntax, const Matrix& semantic, double alpha) {
    if (!syntax.same_shape(semantic) || syntax.rows() != syntax.cols()) {
        throw ShapeError("merge_graphs: syntax " + syntax.shape_string() + " vs semantic " +
                         semantic.shape_string());
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("merge_graphs: alpha must lie in [0, 1]");
    }
    Matrix out(syntax.rows(), syntax.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = alpha * syntax.data()[i] + (1.0 - alpha) * semantic.data()[i];
    }
    return out;
}

std::vector<std::size_t> target_neighbors(const Sample& sample, const Matrix& syntax) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < sample.context_size(); ++c) {
        if (sample.in_target(c)) {
            continue;
        }
        for (std::size_t t = sample.target_start; t < sample.target_start + sample.target_len; ++t) {
            if (syntax(c, t) != 0.0) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

Matrix attribute_overlay(const Sample& sample, const Matrix& syntax, std::size_t attribute_count, double beta) {
    const std::size_t nc = sample.context_size();
    if (syntax.rows() != nc || syntax.cols() != nc) {
        throw ShapeError("attribute_overlay: syntax is " + syntax.shape_string() + " for " + std::to_string(nc) +
                         " tokens");
    }
    const std::size_t n = nc + attribute_count;
    Matrix out(n, n);
    std::vector<std::size_t> receivers;
    for (std::size_t t = sample.target_start; t < sample.target_start + sample.target_len; ++t) {
        receivers.push_back(t);
    }
    for (const std::size_t c : target_neighbors(sample, syntax)) {
        receivers.push_back(c);
    }
    for (std::size_t a = nc; a < n; ++a) {
        for (const std::size_t r : receivers) {
            out(r, a) = beta;
        }
        out(a, a) = 1.0;
    }
    return out;
}

std::vector<NodeKind> node_kinds(const Sample& sample, std::size_t attribute_count) {
    std::vector<NodeKind> kinds;
    kinds.reserve(sample.context_size() + attribute_count);
    for (std::size_t i = 0; i < sample.context_size(); ++i) {
        kinds.push_back(sample.in_target(i) ? NodeKind::target : NodeKind::context);
    }
    kinds.insert(kinds.end(), attribute_count, NodeKind::attribute);
    return kinds;
}

HIGraph attach_attributes(const Matrix& context_block, const Sample& sample, const Matrix& syntax, double beta,
                          std::size_t attribute_count, double alpha) {
    const std::size_t nc = sample.context_size();
    if (context_block.rows() != nc || context_block.cols() != nc) {
        throw ShapeError("attach_attributes: context block is " + context_block.shape_string() + " for " +
                         std::to_string(nc) + " tokens");
    }
    if (!(beta >= 0.0)) {
        throw ConfigError("attach_attributes: beta must be non-negative");
    }
    HIGraph g;
    g.context_nodes = nc;
    g.attribute_nodes = attribute_count;
    g.alpha = alpha;
    g.beta = beta;
    g.kinds = node_kinds(sample, attribute_count);
    g.adjacency = attribute_overlay(sample, syntax, attribute_count, beta);
    for (std::size_t i = 0; i < nc; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            g.adjacency(i, j) = context_block(i, j);
        }
    }
    return g;
}

std::vector<double> degree_vector(const HIGraph& graph) {
    std::vector<double> d(graph.size(), 0.0);
    for (std::size_t i = 0; i < graph.size(); ++i) {
        for (const double w : graph.adjacency.row(i)) {
            d[i] += w;
        }
    }
    return d;
}

std::string inspect(const HIGraph& graph) {
    std::ostringstream os;
    os << "nodes=" << graph.size() << " context=" << graph.context_nodes << " attributes=" << graph.attribute_nodes
       << '\n';
    char buf[64];
    for (std::size_t i = 0; i < graph.size(); ++i) {
        os << i << ' ' << to_string(graph.kinds[i]);
        for (std::size_t j = 0; j < graph.size(); ++j) {
            const double w = graph.adjacency(i, j);
            if (w != 0.0) {
                std::snprintf(buf, sizeof buf, " %zu:%.6g", j, w);
                os << buf;
            }
        }
        os << '\n';
    }
    return os.str();
}

TapeGraph build_hig_on_tape(Tape& tape, const Sample& sample, const Matrix& syntax, Var semantic, double alpha,
                            double beta, std::size_t attribute_count) {
    const std::size_t nc = sample.context_size();
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("build_hig_on_tape: alpha must lie in [0, 1]");
    }
    const Var block = tape.add(tape.constant(scaled(syntax, alpha)), tape.scale(semantic, 1.0 - alpha));
    const std::size_t n = nc + attribute_count;
    TapeGraph g;
    g.context_nodes = nc;
    g.attribute_nodes = attribute_count;
    g.adjacency = tape.add(tape.pad(block, n, n), tape.constant(attribute_overlay(sample, syntax, attribute_count, beta)));
    return g;
}

TapeGraph constant_graph(Tape& tape, const HIGraph& graph) {
    return TapeGraph{tape.constant(graph.adjacency), graph.context_nodes, graph.attribute_nodes};
}

}  // namespace higcn
