#pragma once

#include <functional>
#include <optional>

#include "mpdr/adam.hpp"
#include "mpdr/data.hpp"
#include "mpdr/sampler.hpp"

namespace mpdr {

/// Energy-amplitude regularizer added to the contrastive loss: Scalar
/// penalizes both sides, Reconstruction only the negatives (whose energy is
/// free to collapse otherwise).
enum class RegKind { Scalar, Reconstruction };

const char* reg_kind_name(RegKind k);

struct MpdrTrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 128;
    double lr = 1e-4;
    RegKind reg_kind = RegKind::Scalar;
    double reg_coef = 1.0;
    ChainSpec latent_chain;
    ChainSpec visible_chain;
    RecoveryConfig recovery;
    SigmaRange sigma_range;
    std::size_t ensemble_k = 1;
    /// Synthetic outliers for the per-epoch validation AUROC; 0 disables it.
    std::size_t val_outliers = 0;
    /// Ablation switch: false skips the spherical re-projection of diffused
    /// latents.
    bool latent_reproject = true;
    std::uint64_t seed = 0;

    MpdrTrainConfig() {
        latent_chain.space = Space::Latent;
        visible_chain.space = Space::Visible;
    }

    void validate() const;
};

struct EpochRecord {
    double pos_energy = 0.0;
    double neg_energy = 0.0;
    double loss = 0.0;
    std::optional<double> val_auroc;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

/// The training objective as one graph: mean E(x) - mean E(x-) plus the
/// regularizer. Both energy heads share the same parameter placeholders, so
/// equal positive and negative batches cancel exactly in the gradient.
struct MpdrLoss {
    Graph::NodeId total = Graph::kNoNode;
    Graph::NodeId pos_mean = Graph::kNoNode;
    Graph::NodeId neg_mean = Graph::kNoNode;
    Graph::NodeId reg = Graph::kNoNode; // kNoNode when reg_coef is 0
    std::vector<Graph::NodeId> theta;
};

MpdrLoss build_mpdr_loss(Graph& g, const EnergyModel& model, const Tensor& x,
                         const Tensor& x_minus, RegKind kind, double reg_coef);

/// Replacement negative-sample source, used by tests and baselines in place
/// of the two-stage sampler.
using NegativeSampler =
    std::function<Tensor(const Tensor& batch, std::span<const double> sigmas, Rng& rng)>;

struct StepResult {
    double loss = 0.0;
    double pos_energy = 0.0;
    double neg_energy = 0.0;
    double reg = 0.0;
};

/// One optimizer step: draw per-sample noise magnitudes, generate negatives
/// through the manifold ensemble, assemble the loss, apply Adam.
StepResult mpdr_step(EnergyModel& model, const ManifoldEnsemble& ensemble, const Tensor& batch,
                     const MpdrTrainConfig& cfg, Adam& opt, Rng& rng,
                     const NegativeSampler* negative_override = nullptr);

/// Full training loop over shuffled minibatches. The ensemble is frozen:
/// its parameter checksum must be identical before and after.
TrainHistory train(EnergyModel& model, const ManifoldEnsemble& ensemble, const Dataset& data,
                   const MpdrTrainConfig& cfg, const NegativeSampler* negative_override = nullptr);

/// Recoverable-parameter check: fits a learnable-mean quadratic energy to 1D
/// data through the identity manifold and returns the estimated mean.
double consistency_smoke(const Dataset& data, double initial_mean, const MpdrTrainConfig& cfg);

} // namespace mpdr
