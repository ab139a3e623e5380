#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpdr/mlp.hpp"

namespace mpdr {

struct AutoencoderSpec {
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    std::vector<std::size_t> enc_hidden;
    std::vector<std::size_t> dec_hidden;
    Activation act = Activation::LeakyRelu;
    /// Latent constrained to the unit sphere by the encoder's output
    /// projection.
    bool spherical = true;
    /// Transform on decoder output (sigmoid for data confined to [0, 1]).
    OutputTransform dec_out = OutputTransform::None;
};

/// Encoder/decoder pair over flat parameter storage: encoder tensors first,
/// decoder tensors after.
class Autoencoder {
public:
    Autoencoder(AutoencoderSpec spec, Rng& rng);
    Autoencoder(AutoencoderSpec spec, std::vector<Tensor> params);

    /// Single linear layers with identity weights: encode and decode are
    /// exact identity maps. Used for the plain Gaussian-perturbation
    /// baseline and reduction tests.
    static Autoencoder identity(std::size_t dim);

    const AutoencoderSpec& spec() const { return spec_; }
    std::size_t input_dim() const { return spec_.input_dim; }
    std::size_t latent_dim() const { return spec_.latent_dim; }
    bool spherical() const { return spec_.spherical; }

    MlpSpec encoder_spec() const;
    MlpSpec decoder_spec() const;

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::size_t encoder_tensor_count() const;
    std::span<const Tensor> encoder_params() const;
    std::span<const Tensor> decoder_params() const;

    /// Graph builders following the build_mlp parameter protocol; each
    /// submodule keeps its own theta list.
    Graph::NodeId build_encoder(Graph& g, Graph::NodeId x,
                                std::vector<Graph::NodeId>* theta_io) const;
    Graph::NodeId build_decoder(Graph& g, Graph::NodeId z,
                                std::vector<Graph::NodeId>* theta_io) const;

    Tensor encode(const Tensor& x) const;
    Tensor decode(const Tensor& z) const;
    Tensor reconstruct(const Tensor& x) const;
    /// Mean over the batch of per-sample squared reconstruction error.
    double reconstruction_loss(const Tensor& x) const;

    std::uint64_t param_checksum() const;

private:
    AutoencoderSpec spec_;
    std::vector<Tensor> params_;
};

} // namespace mpdr
