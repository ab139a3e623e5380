#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mpdr/autoencoder.hpp"
#include "mpdr/mlp.hpp"

namespace mpdr {

/// Trainable scalar energy E(x). Implementations expose their computation as
/// a graph fragment so gradients flow with respect to the input (sampling)
/// or the parameters (training).
class EnergyModel {
public:
    virtual ~EnergyModel() = default;

    virtual const char* kind() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::vector<Tensor>& params() = 0;
    virtual const std::vector<Tensor>& params() const = 0;

    /// Appends the energy computation to `g`, producing one value per row of
    /// `x` (node shape [batch]). Parameter handling follows the build_mlp
    /// protocol: nullptr bakes current parameters as constants; an empty list
    /// creates placeholders; a full list reuses them, so a second build
    /// shares parameters with the first.
    virtual Graph::NodeId build(Graph& g, Graph::NodeId x,
                                std::vector<Graph::NodeId>* theta_io) const = 0;

    virtual std::unique_ptr<EnergyModel> clone() const = 0;

    /// Frozen-parameter energies for a batch: [B, D] -> [B].
    Tensor energy(const Tensor& x) const;

    /// Binds current parameter values to the placeholder ids created by
    /// build().
    void bind_params(Bindings& b, std::span<const Graph::NodeId> theta) const;

    std::uint64_t param_checksum() const;
};

/// MLP mapping input directly to one energy value per sample.
class ScalarEnergy : public EnergyModel {
public:
    ScalarEnergy(MlpSpec spec, Rng& rng);
    ScalarEnergy(MlpSpec spec, std::vector<Tensor> params);

    const char* kind() const override { return "scalar"; }
    std::size_t input_dim() const override { return spec_.widths.front(); }
    std::vector<Tensor>& params() override { return params_; }
    const std::vector<Tensor>& params() const override { return params_; }
    Graph::NodeId build(Graph& g, Graph::NodeId x,
                        std::vector<Graph::NodeId>* theta_io) const override;
    std::unique_ptr<EnergyModel> clone() const override;

    const MlpSpec& mlp_spec() const { return spec_; }

private:
    MlpSpec spec_;
    std::vector<Tensor> params_;
};

/// E(x) = 0.5 ||x - mu||^2 with a trainable mean. The Boltzmann density is a
/// unit Gaussian at mu, so samplers and training steps can be checked against
/// closed forms.
class QuadraticMeanEnergy : public EnergyModel {
public:
    explicit QuadraticMeanEnergy(Tensor mu);

    const char* kind() const override { return "quadratic_mean"; }
    std::size_t input_dim() const override { return params_[0].numel(); }
    std::vector<Tensor>& params() override { return params_; }
    const std::vector<Tensor>& params() const override { return params_; }
    Graph::NodeId build(Graph& g, Graph::NodeId x,
                        std::vector<Graph::NodeId>* theta_io) const override;
    std::unique_ptr<EnergyModel> clone() const override;

    const Tensor& mean() const { return params_[0]; }

private:
    std::vector<Tensor> params_; // exactly one tensor, the mean
};

/// Squared reconstruction error of an inner autoencoder:
/// E(x) = ||x - g_d(g_e(x))||^2. Non-negative by construction.
class ReconstructionEnergy : public EnergyModel {
public:
    ReconstructionEnergy(AutoencoderSpec spec, Rng& rng);
    explicit ReconstructionEnergy(Autoencoder ae);

    const char* kind() const override { return "reconstruction"; }
    std::size_t input_dim() const override { return ae_.input_dim(); }
    std::vector<Tensor>& params() override { return ae_.params(); }
    const std::vector<Tensor>& params() const override { return ae_.params(); }
    Graph::NodeId build(Graph& g, Graph::NodeId x,
                        std::vector<Graph::NodeId>* theta_io) const override;
    std::unique_ptr<EnergyModel> clone() const override;

    Autoencoder& autoencoder() { return ae_; }
    const Autoencoder& autoencoder() const { return ae_; }

private:
    Autoencoder ae_;
};

} // namespace mpdr
