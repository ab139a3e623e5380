#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpdr/tensor.hpp"

namespace mpdr {

enum class Activation { Relu, LeakyRelu, Tanh, Sigmoid };

const char* activation_name(Activation a);
/// Inverse of activation_name; unknown names are a ConfigError.
Activation parse_activation(const std::string& name);

/// Static computation graph over tensors, built once and evaluated many times
/// against different placeholder bindings.
///
/// Node ids are assigned in construction order, so ascending id order is a
/// valid topological order. Shapes are fixed at construction and checked
/// there; evaluation only checks that bound values match.
class Graph {
public:
    using NodeId = std::uint32_t;
    static constexpr NodeId kNoNode = std::numeric_limits<std::uint32_t>::max();

    /// Leaf whose value is supplied at evaluation time.
    NodeId placeholder(std::vector<std::size_t> shape, std::string name = "");
    /// Leaf with a value baked into the graph.
    NodeId constant(Tensor value, std::string name = "");

    /// [m, k] x [k, n] -> [m, n].
    NodeId matmul(NodeId a, NodeId b);
    /// Same shape, or [m, n] + [n] broadcast over rows.
    NodeId add(NodeId a, NodeId b);
    /// Same shape, or [m, n] - [n] broadcast over rows.
    NodeId sub(NodeId a, NodeId b);
    /// Elementwise product, same shape.
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double factor);
    NodeId activation(NodeId a, Activation f);
    /// Squared euclidean norm of each row: [m, n] -> [m].
    NodeId row_sqnorm(NodeId a);
    /// Sum of all elements -> [1].
    NodeId sum(NodeId a);
    /// Mean of all elements -> [1].
    NodeId mean(NodeId a);
    /// Rescales each row of [m, n] to the given euclidean norm.
    NodeId sphere_project(NodeId a, double radius = 1.0);
    NodeId reshape(NodeId a, std::vector<std::size_t> shape);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::size_t>& shape(NodeId id) const;
    bool is_placeholder(NodeId id) const;
    std::string describe(NodeId id) const;

private:
    enum class Op : std::uint8_t {
        Placeholder,
        Constant,
        MatMul,
        Add,
        Sub,
        Mul,
        Scale,
        Act,
        RowSqnorm,
        Sum,
        Mean,
        SphereProject,
        Reshape,
    };

    struct Node {
        Op op;
        NodeId a = kNoNode;
        NodeId b = kNoNode;
        std::vector<std::size_t> shape;
        double attr = 0.0;
        Activation act = Activation::Relu;
        Tensor value;
        std::string name;
    };

    NodeId push(Node n);
    const Node& node(NodeId id) const;
    void check_id(NodeId id, const char* where) const;

    std::vector<Node> nodes_;

    friend struct GraphExec;
};

/// Placeholder values for one evaluation.
class Bindings {
public:
    void set(Graph::NodeId id, Tensor value) { values_[id] = std::move(value); }
    const Tensor* find(Graph::NodeId id) const;

private:
    std::unordered_map<Graph::NodeId, Tensor> values_;
};

/// Forward evaluation of one output node. Only ancestors of the output are
/// computed. Throws NumericError if any computed value is non-finite.
Tensor evaluate(const Graph& g, Graph::NodeId output, const Bindings& b);

struct GradientResult {
    /// Value of the scalar output node.
    double value = 0.0;
    /// One gradient per requested node, in request order.
    std::vector<Tensor> grads;
    /// Forward values of the watched nodes, in request order.
    std::vector<Tensor> watched;
};

/// Reverse-mode gradient of a one-element output with respect to the `wrt`
/// nodes. A `wrt` node that does not feed the output gets a zero gradient.
/// `watch` lets callers read intermediate forward values without a second
/// evaluation pass.
GradientResult gradient(const Graph& g, Graph::NodeId output, const Bindings& b,
                        std::span<const Graph::NodeId> wrt,
                        std::span<const Graph::NodeId> watch = {});

} // namespace mpdr
