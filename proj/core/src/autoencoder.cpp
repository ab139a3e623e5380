#include "mpdr/autoencoder.hpp"

#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"

namespace mpdr {

namespace {

void validate_spec(const AutoencoderSpec& spec) {
    if (spec.input_dim == 0 || spec.latent_dim == 0) {
        throw ConfigError("autoencoder spec needs positive input and latent dimensions");
    }
    for (std::size_t w : spec.enc_hidden) {
        if (w == 0) throw ConfigError("autoencoder spec has a zero encoder width");
    }
    for (std::size_t w : spec.dec_hidden) {
        if (w == 0) throw ConfigError("autoencoder spec has a zero decoder width");
    }
}

} // namespace

MlpSpec Autoencoder::encoder_spec() const {
    MlpSpec s;
    s.widths.push_back(spec_.input_dim);
    s.widths.insert(s.widths.end(), spec_.enc_hidden.begin(), spec_.enc_hidden.end());
    s.widths.push_back(spec_.latent_dim);
    s.hidden_act = spec_.act;
    s.out = spec_.spherical ? OutputTransform::Sphere : OutputTransform::None;
    return s;
}

MlpSpec Autoencoder::decoder_spec() const {
    MlpSpec s;
    s.widths.push_back(spec_.latent_dim);
    s.widths.insert(s.widths.end(), spec_.dec_hidden.begin(), spec_.dec_hidden.end());
    s.widths.push_back(spec_.input_dim);
    s.hidden_act = spec_.act;
    s.out = spec_.dec_out;
    return s;
}

Autoencoder::Autoencoder(AutoencoderSpec spec, Rng& rng) : spec_(std::move(spec)) {
    validate_spec(spec_);
    params_ = init_mlp_params(encoder_spec(), rng);
    std::vector<Tensor> dec = init_mlp_params(decoder_spec(), rng);
    params_.insert(params_.end(), std::make_move_iterator(dec.begin()),
                   std::make_move_iterator(dec.end()));
}

Autoencoder::Autoencoder(AutoencoderSpec spec, std::vector<Tensor> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    validate_spec(spec_);
    std::size_t expected = mlp_tensor_count(encoder_spec()) + mlp_tensor_count(decoder_spec());
    if (params_.size() != expected) {
        throw ConfigError("autoencoder: got " + std::to_string(params_.size()) +
                          " parameter tensors, spec needs " + std::to_string(expected));
    }
}

Autoencoder Autoencoder::identity(std::size_t dim) {
    if (dim == 0) throw ConfigError("identity autoencoder needs a positive dimension");
    AutoencoderSpec spec;
    spec.input_dim = dim;
    spec.latent_dim = dim;
    spec.spherical = false;
    Tensor eye({dim, dim});
    for (std::size_t i = 0; i < dim; ++i) eye.at(i, i) = 1.0;
    std::vector<Tensor> params;
    params.push_back(eye);
    params.push_back(Tensor({dim}));
    params.push_back(std::move(eye));
    params.push_back(Tensor({dim}));
    return Autoencoder(std::move(spec), std::move(params));
}

std::size_t Autoencoder::encoder_tensor_count() const {
    return mlp_tensor_count(encoder_spec());
}

std::span<const Tensor> Autoencoder::encoder_params() const {
    return std::span<const Tensor>(params_.data(), encoder_tensor_count());
}

std::span<const Tensor> Autoencoder::decoder_params() const {
    std::size_t n = encoder_tensor_count();
    return std::span<const Tensor>(params_.data() + n, params_.size() - n);
}

Graph::NodeId Autoencoder::build_encoder(Graph& g, Graph::NodeId x,
                                         std::vector<Graph::NodeId>* theta_io) const {
    return build_mlp(g, x, encoder_spec(), encoder_params(), theta_io);
}

Graph::NodeId Autoencoder::build_decoder(Graph& g, Graph::NodeId z,
                                         std::vector<Graph::NodeId>* theta_io) const {
    return build_mlp(g, z, decoder_spec(), decoder_params(), theta_io);
}

Tensor Autoencoder::encode(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != spec_.input_dim) {
        throw ConfigError("encode: input shape " + x.shape_string() +
                          " does not match input dimension " + std::to_string(spec_.input_dim));
    }
    return mlp_forward(encoder_spec(), encoder_params(), x);
}

Tensor Autoencoder::decode(const Tensor& z) const {
    if (z.rank() != 2 || z.cols() != spec_.latent_dim) {
        throw ConfigError("decode: latent shape " + z.shape_string() +
                          " does not match latent dimension " + std::to_string(spec_.latent_dim));
    }
    return mlp_forward(decoder_spec(), decoder_params(), z);
}

Tensor Autoencoder::reconstruct(const Tensor& x) const { return decode(encode(x)); }

double Autoencoder::reconstruction_loss(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != spec_.input_dim) {
        throw ConfigError("reconstruction_loss: input shape " + x.shape_string() +
                          " does not match input dimension " + std::to_string(spec_.input_dim));
    }
    Graph g;
    Graph::NodeId in = g.constant(x);
    Graph::NodeId recon = build_decoder(g, build_encoder(g, in, nullptr), nullptr);
    Graph::NodeId loss = g.mean(g.row_sqnorm(g.sub(in, recon)));
    return evaluate(g, loss, {}).item();
}

std::uint64_t Autoencoder::param_checksum() const { return tensor_checksum(params_); }

} // namespace mpdr
