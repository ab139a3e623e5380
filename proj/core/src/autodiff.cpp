#include "mpdr/autodiff.hpp"

#include <cmath>

#include "mpdr/error.hpp"

namespace mpdr {

namespace {
// Negative-side slope of the leaky rectifier.
constexpr double kLeakySlope = 0.01;
// Rows shorter than this cannot be projected onto a sphere meaningfully.
constexpr double kSphereEps = 1e-12;
} // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "unknown";
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw ConfigError("unknown activation '" + name + "'");
}

Graph::NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

const Graph::Node& Graph::node(NodeId id) const { return nodes_[id]; }

void Graph::check_id(NodeId id, const char* where) const {
    if (id >= nodes_.size()) {
        throw ContractError(std::string(where) + ": node id " + std::to_string(id) +
                            " is not in this graph");
    }
}

Graph::NodeId Graph::placeholder(std::vector<std::size_t> shape, std::string name) {
    if (shape.empty() || shape.size() > 2) {
        throw ContractError("placeholder rank must be 1 or 2, got " + shape_string(shape));
    }
    Node n;
    n.op = Op::Placeholder;
    n.shape = std::move(shape);
    n.name = std::move(name);
    return push(std::move(n));
}

Graph::NodeId Graph::constant(Tensor value, std::string name) {
    Node n;
    n.op = Op::Constant;
    n.shape = value.shape();
    n.value = std::move(value);
    n.name = std::move(name);
    return push(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
    check_id(a, "matmul");
    check_id(b, "matmul");
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
        throw ContractError("matmul: incompatible shapes " + shape_string(sa) + " x " +
                            shape_string(sb));
    }
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.shape = {sa[0], sb[1]};
    return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
    check_id(a, "add");
    check_id(b, "add");
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    bool same = sa == sb;
    bool bias = sa.size() == 2 && sb.size() == 1 && sb[0] == sa[1];
    if (!same && !bias) {
        throw ContractError("add: incompatible shapes " + shape_string(sa) + " + " +
                            shape_string(sb));
    }
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.shape = sa;
    return push(std::move(n));
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
    check_id(a, "sub");
    check_id(b, "sub");
    const auto& sa = nodes_[a].shape;
    const auto& sb = nodes_[b].shape;
    bool same = sa == sb;
    bool bias = sa.size() == 2 && sb.size() == 1 && sb[0] == sa[1];
    if (!same && !bias) {
        throw ContractError("sub: incompatible shapes " + shape_string(sa) + " - " +
                            shape_string(sb));
    }
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.shape = sa;
    return push(std::move(n));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
    check_id(a, "mul");
    check_id(b, "mul");
    if (nodes_[a].shape != nodes_[b].shape) {
        throw ContractError("mul: incompatible shapes " + shape_string(nodes_[a].shape) + " * " +
                            shape_string(nodes_[b].shape));
    }
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.shape = nodes_[a].shape;
    return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId a, double factor) {
    check_id(a, "scale");
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.attr = factor;
    n.shape = nodes_[a].shape;
    return push(std::move(n));
}

Graph::NodeId Graph::activation(NodeId a, Activation f) {
    check_id(a, "activation");
    Node n;
    n.op = Op::Act;
    n.a = a;
    n.act = f;
    n.shape = nodes_[a].shape;
    return push(std::move(n));
}

Graph::NodeId Graph::row_sqnorm(NodeId a) {
    check_id(a, "row_sqnorm");
    const auto& sa = nodes_[a].shape;
    if (sa.size() != 2) {
        throw ContractError("row_sqnorm: expected a rank-2 input, got " + shape_string(sa));
    }
    Node n;
    n.op = Op::RowSqnorm;
    n.a = a;
    n.shape = {sa[0]};
    return push(std::move(n));
}

Graph::NodeId Graph::sum(NodeId a) {
    check_id(a, "sum");
    Node n;
    n.op = Op::Sum;
    n.a = a;
    n.shape = {1};
    return push(std::move(n));
}

Graph::NodeId Graph::mean(NodeId a) {
    check_id(a, "mean");
    Node n;
    n.op = Op::Mean;
    n.a = a;
    n.shape = {1};
    return push(std::move(n));
}

Graph::NodeId Graph::sphere_project(NodeId a, double radius) {
    check_id(a, "sphere_project");
    const auto& sa = nodes_[a].shape;
    if (sa.size() != 2) {
        throw ContractError("sphere_project: expected a rank-2 input, got " + shape_string(sa));
    }
    if (!(radius > 0.0)) {
        throw ContractError("sphere_project: radius must be positive");
    }
    Node n;
    n.op = Op::SphereProject;
    n.a = a;
    n.attr = radius;
    n.shape = sa;
    return push(std::move(n));
}

Graph::NodeId Graph::reshape(NodeId a, std::vector<std::size_t> shape) {
    check_id(a, "reshape");
    if (shape.empty() || shape.size() > 2) {
        throw ContractError("reshape rank must be 1 or 2, got " + shape_string(shape));
    }
    std::size_t n_new = 1;
    for (std::size_t d : shape) n_new *= d;
    std::size_t n_old = 1;
    for (std::size_t d : nodes_[a].shape) n_old *= d;
    if (n_new != n_old) {
        throw ContractError("reshape: " + shape_string(nodes_[a].shape) + " cannot become " +
                            shape_string(shape));
    }
    Node n;
    n.op = Op::Reshape;
    n.a = a;
    n.shape = std::move(shape);
    return push(std::move(n));
}

const std::vector<std::size_t>& Graph::shape(NodeId id) const {
    check_id(id, "shape");
    return nodes_[id].shape;
}

bool Graph::is_placeholder(NodeId id) const {
    check_id(id, "is_placeholder");
    return nodes_[id].op == Op::Placeholder;
}

const Tensor* Bindings::find(Graph::NodeId id) const {
    auto it = values_.find(id);
    return it == values_.end() ? nullptr : &it->second;
}

/// Shared forward/backward machinery for evaluate() and gradient().
struct GraphExec {
    using Op = Graph::Op;

    static const char* op_name(Op op) {
        switch (op) {
            case Op::Placeholder: return "placeholder";
            case Op::Constant: return "constant";
            case Op::MatMul: return "matmul";
            case Op::Add: return "add";
            case Op::Sub: return "sub";
            case Op::Mul: return "mul";
            case Op::Scale: return "scale";
            case Op::Act: return "activation";
            case Op::RowSqnorm: return "row_sqnorm";
            case Op::Sum: return "sum";
            case Op::Mean: return "mean";
            case Op::SphereProject: return "sphere_project";
            case Op::Reshape: return "reshape";
        }
        return "unknown";
    }

    static std::string describe(const Graph& g, Graph::NodeId id) {
        const auto& n = g.nodes_[id];
        std::string s = "node " + std::to_string(id) + " (" + op_name(n.op);
        if (n.op == Op::Act) s += std::string(" ") + activation_name(n.act);
        if (!n.name.empty()) s += " '" + n.name + "'";
        s += ")";
        return s;
    }

    static void mark(const Graph& g, Graph::NodeId root, std::vector<char>& marked) {
        std::vector<Graph::NodeId> stack{root};
        while (!stack.empty()) {
            Graph::NodeId id = stack.back();
            stack.pop_back();
            if (marked[id]) continue;
            marked[id] = 1;
            const auto& n = g.nodes_[id];
            if (n.a != Graph::kNoNode) stack.push_back(n.a);
            if (n.b != Graph::kNoNode) stack.push_back(n.b);
        }
    }

    static void forward(const Graph& g, const std::vector<char>& marked, const Bindings& b,
                        std::vector<Tensor>& vals) {
        for (Graph::NodeId id = 0; id < g.nodes_.size(); ++id) {
            if (!marked[id]) continue;
            const auto& n = g.nodes_[id];
            switch (n.op) {
                case Op::Placeholder: {
                    const Tensor* v = b.find(id);
                    if (!v) {
                        throw ContractError("unbound " + describe(g, id));
                    }
                    if (v->shape() != n.shape) {
                        throw ContractError("binding for " + describe(g, id) + " has shape " +
                                            v->shape_string() + ", expected " +
                                            shape_string(n.shape));
                    }
                    vals[id] = *v;
                    break;
                }
                case Op::Constant:
                    vals[id] = n.value;
                    break;
                case Op::MatMul: {
                    const Tensor& va = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    std::size_t m = va.rows(), k = va.cols(), c = vb.cols();
                    Tensor out({m, c});
                    const double* pa = va.data();
                    const double* pb = vb.data();
                    double* po = out.data();
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t l = 0; l < k; ++l) {
                            double av = pa[i * k + l];
                            if (av == 0.0) continue;
                            const double* brow = pb + l * c;
                            double* orow = po + i * c;
                            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
                        }
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Add: {
                    const Tensor& va = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    Tensor out = va;
                    if (va.same_shape(vb)) {
                        for (std::size_t i = 0; i < out.numel(); ++i) out[i] += vb[i];
                    } else {
                        std::size_t c = va.cols();
                        for (std::size_t i = 0; i < out.numel(); ++i) out[i] += vb[i % c];
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Sub: {
                    const Tensor& va = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    Tensor out = va;
                    if (va.same_shape(vb)) {
                        for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= vb[i];
                    } else {
                        std::size_t c = va.cols();
                        for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= vb[i % c];
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Mul: {
                    Tensor out = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= vb[i];
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Scale: {
                    Tensor out = vals[n.a];
                    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= n.attr;
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Act: {
                    Tensor out = vals[n.a];
                    switch (n.act) {
                        case Activation::Relu:
                            for (std::size_t i = 0; i < out.numel(); ++i)
                                if (out[i] < 0.0) out[i] = 0.0;
                            break;
                        case Activation::LeakyRelu:
                            for (std::size_t i = 0; i < out.numel(); ++i)
                                if (out[i] < 0.0) out[i] *= kLeakySlope;
                            break;
                        case Activation::Tanh:
                            for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
                            break;
                        case Activation::Sigmoid:
                            for (std::size_t i = 0; i < out.numel(); ++i)
                                out[i] = 1.0 / (1.0 + std::exp(-out[i]));
                            break;
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::RowSqnorm: {
                    const Tensor& va = vals[n.a];
                    std::size_t m = va.rows(), c = va.cols();
                    Tensor out({m});
                    for (std::size_t i = 0; i < m; ++i) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            double v = va[i * c + j];
                            s += v * v;
                        }
                        out[i] = s;
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Sum: {
                    const Tensor& va = vals[n.a];
                    double s = 0.0;
                    for (std::size_t i = 0; i < va.numel(); ++i) s += va[i];
                    vals[id] = Tensor::scalar(s);
                    break;
                }
                case Op::Mean: {
                    const Tensor& va = vals[n.a];
                    double s = 0.0;
                    for (std::size_t i = 0; i < va.numel(); ++i) s += va[i];
                    vals[id] = Tensor::scalar(s / static_cast<double>(va.numel()));
                    break;
                }
                case Op::SphereProject: {
                    const Tensor& va = vals[n.a];
                    std::size_t m = va.rows(), c = va.cols();
                    Tensor out({m, c});
                    for (std::size_t i = 0; i < m; ++i) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            double v = va[i * c + j];
                            s += v * v;
                        }
                        double norm = std::sqrt(s);
                        if (norm < kSphereEps) {
                            throw DegenerateInputError(
                                "sphere projection of a near-zero row (row " + std::to_string(i) +
                                ", " + describe(g, id) + ")");
                        }
                        double f = n.attr / norm;
                        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = va[i * c + j] * f;
                    }
                    vals[id] = std::move(out);
                    break;
                }
                case Op::Reshape: {
                    vals[id] = Tensor(n.shape, vals[n.a].values());
                    break;
                }
            }
            if (!vals[id].all_finite()) {
                throw NumericError("non-finite value at " + describe(g, id));
            }
        }
    }

    static void backward(const Graph& g, const std::vector<Tensor>& vals, Graph::NodeId output,
                         std::vector<Tensor>& grads, std::vector<char>& has_grad) {
        grads[output] = Tensor(g.nodes_[output].shape);
        for (std::size_t i = 0; i < grads[output].numel(); ++i) grads[output][i] = 1.0;
        has_grad[output] = 1;

        auto grad_for = [&](Graph::NodeId id) -> Tensor& {
            if (!has_grad[id]) {
                grads[id] = Tensor(g.nodes_[id].shape);
                has_grad[id] = 1;
            }
            return grads[id];
        };

        for (Graph::NodeId id = output + 1; id-- > 0;) {
            if (!has_grad[id]) continue;
            const auto& n = g.nodes_[id];
            const Tensor& gr = grads[id];
            switch (n.op) {
                case Op::Placeholder:
                case Op::Constant:
                    break;
                case Op::MatMul: {
                    // Each gradient element is accumulated in a local sum and
                    // committed with a single +=. Structurally mirrored
                    // subgraphs (shared parameters consumed by a positive and
                    // a negated path) then cancel bitwise.
                    const Tensor& va = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    std::size_t m = va.rows(), k = va.cols(), c = vb.cols();
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t l = 0; l < k; ++l) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < c; ++j) s += gr[i * c + j] * vb[l * c + j];
                            ga[i * k + l] += s;
                        }
                    }
                    Tensor& gb = grad_for(n.b);
                    for (std::size_t l = 0; l < k; ++l) {
                        for (std::size_t j = 0; j < c; ++j) {
                            double s = 0.0;
                            for (std::size_t i = 0; i < m; ++i) s += va[i * k + l] * gr[i * c + j];
                            gb[l * c + j] += s;
                        }
                    }
                    break;
                }
                case Op::Add: {
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gr[i];
                    Tensor& gb = grad_for(n.b);
                    if (gb.numel() == gr.numel()) {
                        for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gr[i];
                    } else {
                        // Bias broadcast: one committed column sum per element,
                        // as in the matmul rule.
                        std::size_t c = gb.numel();
                        std::size_t rows = gr.numel() / c;
                        for (std::size_t j = 0; j < c; ++j) {
                            double s = 0.0;
                            for (std::size_t r = 0; r < rows; ++r) s += gr[r * c + j];
                            gb[j] += s;
                        }
                    }
                    break;
                }
                case Op::Sub: {
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gr[i];
                    Tensor& gb = grad_for(n.b);
                    if (gb.numel() == gr.numel()) {
                        for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= gr[i];
                    } else {
                        std::size_t c = gb.numel();
                        std::size_t rows = gr.numel() / c;
                        for (std::size_t j = 0; j < c; ++j) {
                            double s = 0.0;
                            for (std::size_t r = 0; r < rows; ++r) s += gr[r * c + j];
                            gb[j] -= s;
                        }
                    }
                    break;
                }
                case Op::Mul: {
                    const Tensor& va = vals[n.a];
                    const Tensor& vb = vals[n.b];
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gr[i] * vb[i];
                    Tensor& gb = grad_for(n.b);
                    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gr[i] * va[i];
                    break;
                }
                case Op::Scale: {
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += n.attr * gr[i];
                    break;
                }
                case Op::Act: {
                    const Tensor& va = vals[n.a];
                    const Tensor& y = vals[id];
                    Tensor& ga = grad_for(n.a);
                    switch (n.act) {
                        case Activation::Relu:
                            for (std::size_t i = 0; i < ga.numel(); ++i)
                                if (va[i] > 0.0) ga[i] += gr[i];
                            break;
                        case Activation::LeakyRelu:
                            for (std::size_t i = 0; i < ga.numel(); ++i)
                                ga[i] += gr[i] * (va[i] > 0.0 ? 1.0 : kLeakySlope);
                            break;
                        case Activation::Tanh:
                            for (std::size_t i = 0; i < ga.numel(); ++i)
                                ga[i] += gr[i] * (1.0 - y[i] * y[i]);
                            break;
                        case Activation::Sigmoid:
                            for (std::size_t i = 0; i < ga.numel(); ++i)
                                ga[i] += gr[i] * y[i] * (1.0 - y[i]);
                            break;
                    }
                    break;
                }
                case Op::RowSqnorm: {
                    const Tensor& va = vals[n.a];
                    std::size_t m = va.rows(), c = va.cols();
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < m; ++i) {
                        double gi = gr[i];
                        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += 2.0 * va[i * c + j] * gi;
                    }
                    break;
                }
                case Op::Sum: {
                    Tensor& ga = grad_for(n.a);
                    double gv = gr[0];
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
                    break;
                }
                case Op::Mean: {
                    Tensor& ga = grad_for(n.a);
                    double gv = gr[0] / static_cast<double>(ga.numel());
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gv;
                    break;
                }
                case Op::SphereProject: {
                    const Tensor& va = vals[n.a];
                    std::size_t m = va.rows(), c = va.cols();
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < m; ++i) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                            double v = va[i * c + j];
                            s += v * v;
                        }
                        double norm = std::sqrt(s);
                        double dot = 0.0;
                        for (std::size_t j = 0; j < c; ++j) dot += va[i * c + j] * gr[i * c + j];
                        dot /= s;
                        double f = n.attr / norm;
                        for (std::size_t j = 0; j < c; ++j) {
                            ga[i * c + j] += f * (gr[i * c + j] - va[i * c + j] * dot);
                        }
                    }
                    break;
                }
                case Op::Reshape: {
                    Tensor& ga = grad_for(n.a);
                    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gr[i];
                    break;
                }
            }
        }
    }
};

namespace {

void check_in_graph(const Graph& g, Graph::NodeId id, const char* where) {
    if (id >= g.size()) {
        throw ContractError(std::string(where) + ": node id " + std::to_string(id) +
                            " is not in this graph");
    }
}

} // namespace

Tensor evaluate(const Graph& g, Graph::NodeId output, const Bindings& b) {
    check_in_graph(g, output, "evaluate");
    std::vector<char> marked(g.size(), 0);
    GraphExec::mark(g, output, marked);
    std::vector<Tensor> vals(g.size());
    GraphExec::forward(g, marked, b, vals);
    return vals[output];
}

std::string Graph::describe(NodeId id) const {
    check_id(id, "describe");
    return GraphExec::describe(*this, id);
}

GradientResult gradient(const Graph& g, Graph::NodeId output, const Bindings& b,
                        std::span<const Graph::NodeId> wrt,
                        std::span<const Graph::NodeId> watch) {
    check_in_graph(g, output, "gradient");
    std::size_t out_numel = 1;
    for (std::size_t d : g.shape(output)) out_numel *= d;
    if (out_numel != 1) {
        throw ContractError("gradient target must be a one-element tensor, got shape " +
                            shape_string(g.shape(output)));
    }
    std::vector<char> marked(g.size(), 0);
    GraphExec::mark(g, output, marked);
    for (Graph::NodeId w : watch) {
        check_in_graph(g, w, "gradient watch");
        GraphExec::mark(g, w, marked);
    }
    std::vector<Tensor> vals(g.size());
    GraphExec::forward(g, marked, b, vals);

    std::vector<Tensor> grads(g.size());
    std::vector<char> has_grad(g.size(), 0);
    GraphExec::backward(g, vals, output, grads, has_grad);

    GradientResult r;
    r.value = vals[output].item();
    r.grads.reserve(wrt.size());
    for (Graph::NodeId id : wrt) {
        check_in_graph(g, id, "gradient wrt");
        if (has_grad[id]) {
            r.grads.push_back(grads[id]);
        } else {
            r.grads.push_back(Tensor(g.shape(id)));
        }
    }
    r.watched.reserve(watch.size());
    for (Graph::NodeId w : watch) r.watched.push_back(vals[w]);
    return r;
}

} // namespace mpdr
