#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mpdr::cli {

/// Command-line values layered over the config file: --seed and --out win
/// over [experiment], --label-col wins over [data], --no-latent-reproject
/// forces the ablation regardless of [train].
struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> label_col; // "none" or "last"
    bool no_latent_reproject = false;
};

/// Pretrains every [autoencoder] ensemble member on the [data] set, writing
/// ae_<i>.ckpt and pretrain_history.txt into the output directory.
void cmd_pretrain_ae(const CliOptions& opts);

/// Trains the [energy] model against the pretrained manifold ensemble,
/// writing energy.ckpt and train_history.txt.
void cmd_train(const CliOptions& opts);

/// Scores the [eval] inlier and outlier files with a trained model and
/// writes eval_report.txt with the requested metrics.
void cmd_eval(const CliOptions& opts);

/// Dumps energies and normalized densities over a 2D grid and reports the
/// l1 distance to the reference density in density_report.txt.
void cmd_density_grid(const CliOptions& opts);

/// Dumps negative samples drawn through the two-stage sampler for
/// inspection.
void cmd_sample(const CliOptions& opts);

} // namespace mpdr::cli
