#pragma once

#include <span>

#include "mpdr/autoencoder.hpp"
#include "mpdr/energy.hpp"

namespace mpdr {

/// Which variable an energy or chain works on: data space or the latent
/// space of the perturbation autoencoder.
enum class Space { Visible, Latent };

const char* space_name(Space s);

struct RecoveryConfig {
    double gamma_visible = 0.0001;
    double gamma_latent = 0.0001;

    void validate() const;
};

/// Appends the recovery energy to `g`:
///   E_model(x) + (gamma / (2 sigma_i^2)) ||z_tilde_i - f_e(x_i)||^2
/// per row of `x`. `sigma` holds one value per row, or a single value shared
/// by the batch. With gamma == 0 the perturbation term is omitted entirely,
/// so the node computes exactly what model.build would.
///
/// `theta_io` follows the build_mlp protocol for the *model* parameters; the
/// autoencoder is always baked in as constants (it is frozen here).
Graph::NodeId build_recovery_energy(Graph& g, const EnergyModel& model, const Autoencoder& ae,
                                    Graph::NodeId x, const Tensor& z_tilde,
                                    std::span<const double> sigma, double gamma,
                                    std::vector<Graph::NodeId>* theta_io);

/// Pullback of the recovery energy through the decoder: the energy above
/// evaluated at x = f_d(z), as a function of `z` ([B, D_z]).
Graph::NodeId build_latent_energy(Graph& g, const EnergyModel& model, const Autoencoder& ae,
                                  Graph::NodeId z, const Tensor& z_tilde,
                                  std::span<const double> sigma, double gamma,
                                  std::vector<Graph::NodeId>* theta_io);

/// Frozen-parameter evaluation, one energy per row.
Tensor recovery_energy(const EnergyModel& model, const Autoencoder& ae, const Tensor& x,
                       const Tensor& z_tilde, std::span<const double> sigma, double gamma);

Tensor latent_energy(const EnergyModel& model, const Autoencoder& ae, const Tensor& z,
                     const Tensor& z_tilde, std::span<const double> sigma, double gamma);

/// Gradient of the summed batch energy with respect to `point` (visible x or
/// latent z depending on `space`). Row i of the result is the gradient of
/// row i's energy.
Tensor grad_recovery(const EnergyModel& model, const Autoencoder& ae, const Tensor& point,
                     const Tensor& z_tilde, std::span<const double> sigma, double gamma,
                     Space space);

} // namespace mpdr
