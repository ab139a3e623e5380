#include "mpdr/mlp.hpp"

#include <cmath>

#include "mpdr/error.hpp"

namespace mpdr {

void validate(const MlpSpec& spec) {
    if (spec.widths.size() < 2) {
        throw ConfigError("mlp spec needs an input and an output width");
    }
    for (std::size_t w : spec.widths) {
        if (w == 0) throw ConfigError("mlp spec has a zero layer width");
    }
}

std::size_t mlp_tensor_count(const MlpSpec& spec) {
    return 2 * (spec.widths.size() - 1);
}

std::vector<Tensor> init_mlp_params(const MlpSpec& spec, Rng& rng) {
    validate(spec);
    std::vector<Tensor> params;
    params.reserve(mlp_tensor_count(spec));
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        std::size_t fan_in = spec.widths[l];
        std::size_t fan_out = spec.widths[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor w({fan_in, fan_out});
        for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
        params.push_back(std::move(w));
        params.push_back(Tensor({fan_out}));
    }
    return params;
}

Graph::NodeId build_mlp(Graph& g, Graph::NodeId x, const MlpSpec& spec,
                        std::span<const Tensor> params, std::vector<Graph::NodeId>* theta_io) {
    validate(spec);
    std::size_t count = mlp_tensor_count(spec);
    bool frozen = theta_io == nullptr;
    bool create = !frozen && theta_io->empty();
    if (frozen && params.size() != count) {
        throw ContractError("build_mlp: expected " + std::to_string(count) +
                            " parameter tensors, got " + std::to_string(params.size()));
    }
    if (!frozen && !create && theta_io->size() != count) {
        throw ContractError("build_mlp: parameter node list holds " +
                            std::to_string(theta_io->size()) + " ids, expected " +
                            std::to_string(count));
    }
    if (g.shape(x).size() != 2 || g.shape(x)[1] != spec.widths.front()) {
        throw ContractError("build_mlp: input node has shape " + shape_string(g.shape(x)) +
                            ", expected [batch, " + std::to_string(spec.widths.front()) + "]");
    }

    auto param_node = [&](std::size_t idx, std::vector<std::size_t> shape) -> Graph::NodeId {
        if (frozen) {
            if (params[idx].shape() != shape) {
                throw ContractError("build_mlp: parameter " + std::to_string(idx) +
                                    " has shape " + params[idx].shape_string() + ", expected " +
                                    shape_string(shape));
            }
            return g.constant(params[idx]);
        }
        if (create) {
            Graph::NodeId id = g.placeholder(std::move(shape));
            theta_io->push_back(id);
            return id;
        }
        return (*theta_io)[idx];
    };

    Graph::NodeId h = x;
    std::size_t layers = spec.widths.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        Graph::NodeId w = param_node(2 * l, {spec.widths[l], spec.widths[l + 1]});
        Graph::NodeId b = param_node(2 * l + 1, {spec.widths[l + 1]});
        h = g.add(g.matmul(h, w), b);
        if (l + 1 < layers) h = g.activation(h, spec.hidden_act);
    }
    switch (spec.out) {
        case OutputTransform::None:
            break;
        case OutputTransform::Sphere:
            h = g.sphere_project(h);
            break;
        case OutputTransform::Sigmoid:
            h = g.activation(h, Activation::Sigmoid);
            break;
    }
    return h;
}

Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& x) {
    Graph g;
    Graph::NodeId in = g.constant(x);
    Graph::NodeId out = build_mlp(g, in, spec, params, nullptr);
    return evaluate(g, out, {});
}

Tensor sphere_project(const Tensor& v) {
    Graph g;
    Graph::NodeId in = g.constant(v.rank() == 1 ? Tensor({1, v.numel()}, v.values()) : v);
    Tensor out = evaluate(g, g.sphere_project(in), {});
    if (v.rank() == 1) return Tensor(v.shape(), out.values());
    return out;
}

const char* output_transform_name(OutputTransform t) {
    switch (t) {
        case OutputTransform::None: return "none";
        case OutputTransform::Sphere: return "sphere";
        case OutputTransform::Sigmoid: return "sigmoid";
    }
    return "unknown";
}

OutputTransform parse_output_transform(const std::string& name) {
    if (name == "none") return OutputTransform::None;
    if (name == "sphere") return OutputTransform::Sphere;
    if (name == "sigmoid") return OutputTransform::Sigmoid;
    throw ConfigError("unknown output transform '" + name + "'");
}

} // namespace mpdr
