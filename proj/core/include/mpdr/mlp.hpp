#pragma once

#include <span>
#include <vector>

#include "mpdr/autodiff.hpp"
#include "mpdr/rng.hpp"
#include "mpdr/tensor.hpp"

namespace mpdr {

enum class OutputTransform { None, Sphere, Sigmoid };

/// Fully connected network: affine layers with the hidden activation between
/// them, a linear last layer, and an optional transform on the output.
struct MlpSpec {
    std::vector<std::size_t> widths; // input, hidden..., output
    Activation hidden_act = Activation::LeakyRelu;
    OutputTransform out = OutputTransform::None;
};

void validate(const MlpSpec& spec);

/// Number of parameter tensors: one weight matrix and one bias per layer.
std::size_t mlp_tensor_count(const MlpSpec& spec);

/// Weights uniform in ±1/sqrt(fan_in), biases zero.
std::vector<Tensor> init_mlp_params(const MlpSpec& spec, Rng& rng);

/// Appends the network to `g`, reading input rows from `x` ([B, widths[0]]).
/// Parameter handling:
///  - theta_io == nullptr: `params` are baked into the graph as constants
///    (frozen network).
///  - *theta_io empty: a placeholder per parameter tensor is created and its
///    id appended; bind the model's parameters before evaluating.
///  - *theta_io holding mlp_tensor_count ids: those placeholders are reused,
///    so two builds of the same network share parameters exactly.
Graph::NodeId build_mlp(Graph& g, Graph::NodeId x, const MlpSpec& spec,
                        std::span<const Tensor> params, std::vector<Graph::NodeId>* theta_io);

/// One-shot forward pass through a frozen network.
Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& x);

/// Eager row-wise projection onto the unit sphere (v / ||v||). Accepts a
/// single vector or a batch of rows.
Tensor sphere_project(const Tensor& v);

const char* output_transform_name(OutputTransform t);
/// Inverse of output_transform_name; unknown names are a ConfigError.
OutputTransform parse_output_transform(const std::string& name);

} // namespace mpdr
