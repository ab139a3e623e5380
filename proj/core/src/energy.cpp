#include "mpdr/energy.hpp"

#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"

namespace mpdr {

Tensor EnergyModel::energy(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != input_dim()) {
        throw ConfigError(std::string("energy: input shape ") + x.shape_string() +
                          " does not match model dimension " + std::to_string(input_dim()));
    }
    Graph g;
    Graph::NodeId in = g.constant(x);
    Graph::NodeId e = build(g, in, nullptr);
    return evaluate(g, e, {});
}

void EnergyModel::bind_params(Bindings& b, std::span<const Graph::NodeId> theta) const {
    const std::vector<Tensor>& p = params();
    if (theta.size() != p.size()) {
        throw ContractError("bind_params: " + std::to_string(theta.size()) + " nodes for " +
                            std::to_string(p.size()) + " parameter tensors");
    }
    for (std::size_t i = 0; i < p.size(); ++i) b.set(theta[i], p[i]);
}

std::uint64_t EnergyModel::param_checksum() const { return tensor_checksum(params()); }

ScalarEnergy::ScalarEnergy(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
    validate(spec_);
    if (spec_.widths.back() != 1) {
        throw ConfigError("scalar energy network must end in a width-1 layer");
    }
    if (spec_.out != OutputTransform::None) {
        throw ConfigError("scalar energy output must be unconstrained");
    }
    params_ = init_mlp_params(spec_, rng);
}

ScalarEnergy::ScalarEnergy(MlpSpec spec, std::vector<Tensor> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    validate(spec_);
    if (spec_.widths.back() != 1) {
        throw ConfigError("scalar energy network must end in a width-1 layer");
    }
    if (params_.size() != mlp_tensor_count(spec_)) {
        throw ConfigError("scalar energy: got " + std::to_string(params_.size()) +
                          " parameter tensors, spec needs " +
                          std::to_string(mlp_tensor_count(spec_)));
    }
}

Graph::NodeId ScalarEnergy::build(Graph& g, Graph::NodeId x,
                                  std::vector<Graph::NodeId>* theta_io) const {
    Graph::NodeId out = build_mlp(g, x, spec_, params_, theta_io);
    return g.reshape(out, {g.shape(x)[0]});
}

std::unique_ptr<EnergyModel> ScalarEnergy::clone() const {
    return std::make_unique<ScalarEnergy>(*this);
}

QuadraticMeanEnergy::QuadraticMeanEnergy(Tensor mu) {
    if (mu.rank() != 1 || mu.numel() == 0) {
        throw ConfigError("quadratic mean energy needs a rank-1 mean, got " + mu.shape_string());
    }
    params_.push_back(std::move(mu));
}

Graph::NodeId QuadraticMeanEnergy::build(Graph& g, Graph::NodeId x,
                                         std::vector<Graph::NodeId>* theta_io) const {
    Graph::NodeId mu;
    if (!theta_io) {
        mu = g.constant(params_[0], "mu");
    } else if (theta_io->empty()) {
        mu = g.placeholder({params_[0].numel()}, "mu");
        theta_io->push_back(mu);
    } else {
        if (theta_io->size() != 1) {
            throw ContractError("quadratic mean energy has one parameter tensor, got " +
                                std::to_string(theta_io->size()) + " node ids");
        }
        mu = theta_io->front();
    }
    return g.scale(g.row_sqnorm(g.sub(x, mu)), 0.5);
}

std::unique_ptr<EnergyModel> QuadraticMeanEnergy::clone() const {
    return std::make_unique<QuadraticMeanEnergy>(*this);
}

ReconstructionEnergy::ReconstructionEnergy(AutoencoderSpec spec, Rng& rng)
    : ae_(std::move(spec), rng) {}

ReconstructionEnergy::ReconstructionEnergy(Autoencoder ae) : ae_(std::move(ae)) {}

Graph::NodeId ReconstructionEnergy::build(Graph& g, Graph::NodeId x,
                                          std::vector<Graph::NodeId>* theta_io) const {
    std::size_t enc_count = ae_.encoder_tensor_count();
    std::vector<Graph::NodeId> enc_theta, dec_theta;
    bool reuse = theta_io && !theta_io->empty();
    if (reuse) {
        if (theta_io->size() != ae_.params().size()) {
            throw ContractError("reconstruction energy: parameter node list holds " +
                                std::to_string(theta_io->size()) + " ids, expected " +
                                std::to_string(ae_.params().size()));
        }
        enc_theta.assign(theta_io->begin(), theta_io->begin() + enc_count);
        dec_theta.assign(theta_io->begin() + enc_count, theta_io->end());
    }
    Graph::NodeId z = ae_.build_encoder(g, x, theta_io ? &enc_theta : nullptr);
    Graph::NodeId recon = ae_.build_decoder(g, z, theta_io ? &dec_theta : nullptr);
    if (theta_io && !reuse) {
        *theta_io = enc_theta;
        theta_io->insert(theta_io->end(), dec_theta.begin(), dec_theta.end());
    }
    return g.row_sqnorm(g.sub(x, recon));
}

std::unique_ptr<EnergyModel> ReconstructionEnergy::clone() const {
    return std::make_unique<ReconstructionEnergy>(*this);
}

} // namespace mpdr
