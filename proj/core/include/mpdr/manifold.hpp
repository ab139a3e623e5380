#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpdr/autoencoder.hpp"
#include "mpdr/data.hpp"

namespace mpdr {

/// Noise-magnitude ensemble: each perturbed sample draws its own sigma from
/// this interval.
struct SigmaRange {
    double min = 0.05;
    double max = 0.3;
};

/// Frozen autoencoders defining the manifolds negatives are drawn around.
/// Group g of a mini-batch uses member g.
struct ManifoldEnsemble {
    std::vector<Autoencoder> members;
    SigmaRange sigma_range;

    std::size_t size() const { return members.size(); }
    void validate() const;
    std::uint64_t checksum() const;
};

struct PretrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    /// l2 penalty on encoder weight matrices (biases exempt).
    double weight_decay_enc = 0.0;
    std::uint64_t seed = 0;
};

struct PretrainResult {
    Autoencoder ae;
    /// epoch_loss[0] is the loss of the untrained model; one entry per epoch
    /// after that.
    std::vector<double> epoch_loss;
};

/// Reconstruction-error training of an autoencoder, deterministic from the
/// config seed. The result is meant to be frozen: MPD keeps the manifold
/// fixed while the energy trains.
PretrainResult pretrain_autoencoder(const Dataset& data, const AutoencoderSpec& spec,
                                    const PretrainConfig& cfg);

/// One mini-batch worth of manifold projection-diffusion draws, kept as
/// parallel rows: row i of every tensor belongs to sample i.
struct PerturbationRecord {
    Tensor x;       // input samples [B, Dx]
    Tensor z;       // encoded points f_e(x) [B, Dz]
    Tensor z_tilde; // diffused latents [B, Dz]
    Tensor x_tilde; // decoded perturbations f_d(z_tilde) [B, Dx]
    std::vector<double> sigma;
    std::vector<std::size_t> manifold_index;
};

/// x -> z = f_e(x) -> z_tilde = z + sigma * eps -> x_tilde = f_d(z_tilde).
/// For spherical autoencoders z_tilde is re-projected onto the sphere unless
/// `reproject` is false (ablation). `sigma` holds one positive value per row.
PerturbationRecord mpd_perturb(const Autoencoder& ae, const Tensor& x,
                               std::span<const double> sigma, Rng& rng, bool reproject = true);

/// Independent uniform draws from the sigma interval.
std::vector<double> sample_sigma(const SigmaRange& range, Rng& rng, std::size_t n);

/// Round-robin partition of batch indices into K groups with sizes differing
/// by at most one. Group g of the result is served by ensemble member g.
std::vector<std::vector<std::size_t>> split_batch(std::size_t batch_size, std::size_t k);

} // namespace mpdr
