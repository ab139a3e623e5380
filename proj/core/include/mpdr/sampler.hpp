#pragma once

#include <functional>
#include <span>

#include "mpdr/manifold.hpp"
#include "mpdr/recovery.hpp"

namespace mpdr {

/// Energy and its input-gradient for a batch: energy maps [B, D] -> [B],
/// grad maps [B, D] -> [B, D].
struct EnergyGradFn {
    std::function<Tensor(const Tensor&)> energy;
    std::function<Tensor(const Tensor&)> grad;
};

enum class Constraint { None, Sphere, Clamp };

/// Langevin chain parameters. The gradient multiplier and the noise
/// multiplier are tuned independently; no Metropolis correction is applied.
struct ChainSpec {
    std::size_t steps = 0;
    double step_size = 0.0;  // multiplies the energy gradient
    double noise_scale = 0.0; // multiplies unit Gaussian noise
    Space space = Space::Visible;
    Constraint constraint = Constraint::None;
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;

    void validate() const;
};

struct ChainResult {
    Tensor final;
    Tensor initial;
    Tensor energy_start; // per sample, at the initial points
    Tensor energy_end;   // per sample, at the final points
    std::size_t accepted = 0; // equals steps: every proposal is taken
};

/// Runs `spec.steps` updates x <- x - step_size * grad(x) + noise_scale * eps
/// with the constraint projection applied after each step.
ChainResult lmc(const EnergyGradFn& fn, const Tensor& x0, const ChainSpec& spec, Rng& rng);

/// LMC on the latent pullback energy, starting from z_tilde. Spherical
/// autoencoders get the sphere projection after every step regardless of
/// spec.constraint.
Tensor latent_chain(const EnergyModel& model, const Autoencoder& ae, const Tensor& z_tilde,
                    const ChainSpec& spec, const RecoveryConfig& cfg,
                    std::span<const double> sigma, Rng& rng);

/// LMC on the recovery energy, starting from x0 (normally the decoded end of
/// the latent chain).
Tensor visible_chain(const EnergyModel& model, const Autoencoder& ae, const Tensor& x0,
                     const Tensor& z_tilde, const ChainSpec& spec, const RecoveryConfig& cfg,
                     std::span<const double> sigma, Rng& rng);

struct TwoStageResult {
    Tensor x_minus;                          // aligned with the input batch
    std::vector<PerturbationRecord> records; // one per ensemble group
    std::vector<std::vector<std::size_t>> groups; // input rows handled per group
};

/// Negative sampling for a batch: rows are dealt round-robin to the ensemble
/// members; each group is perturbed through its autoencoder, refined by the
/// latent chain, decoded, and refined by the visible chain. `reproject`
/// false skips the spherical re-projection of the diffused latent (ablation).
TwoStageResult two_stage_sample(const EnergyModel& model, const ManifoldEnsemble& ensemble,
                                const Tensor& x, std::span<const double> sigmas,
                                const ChainSpec& latent_spec, const ChainSpec& visible_spec,
                                const RecoveryConfig& cfg, Rng& rng, bool reproject = true);

} // namespace mpdr
