#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpdr/rng.hpp"
#include "mpdr/tensor.hpp"

namespace mpdr {

/// Rows of samples with optional integer labels. Label meaning depends on the
/// source: class ids for mixtures and holdout splits, 0=inlier / 1=outlier
/// for the synthetic benchmarks.
struct Dataset {
    Tensor rows;
    std::vector<int> labels;
    std::string meta;

    std::size_t size() const { return rows.numel() == 0 ? 0 : rows.rows(); }
    std::size_t dim() const { return rows.numel() == 0 ? 0 : rows.cols(); }
    bool has_labels() const { return !labels.empty(); }
};

/// Mixture of 8 isotropic Gaussians with means equally spaced on a circle.
/// Components are drawn uniformly; labels carry the component index.
Dataset make_eight_gaussians(std::size_t n, double radius, double stddev, std::uint64_t seed);

/// Exact mixture density of the generator above at each row of `points`.
std::vector<double> true_density_eight_gaussians(const Tensor& points, double radius,
                                                 double stddev);

enum class ManifoldKind { Circle, SphereShell };

/// Labeled anomaly benchmark: inliers near a unit circle (embedded in `dim`
/// ambient dimensions through a seeded orthonormal frame) or near the unit
/// sphere shell; outliers at interior and exterior radii. Labels: 0 inlier,
/// 1 outlier.
Dataset make_manifold_benchmark(ManifoldKind kind, std::size_t dim, std::size_t n_in,
                                std::size_t n_out, std::uint64_t seed);

/// Numeric CSV: UTF-8, comma separated, decimal-point reals, one sample per
/// row. A non-numeric first line is treated as a header. With
/// `label_col_last`, the final column is parsed as integer labels.
Dataset load_csv(const std::string& path, bool label_col_last = false);

/// Writes rows (and labels, when present) with 17 significant digits so a
/// round-trip reproduces the values exactly.
void save_csv(const Dataset& ds, const std::string& path);

enum class PreprocessOp { Standardize, SphereNormalize, AddGaussianNoise };

/// Statistics captured while preprocessing a training set, reusable on test
/// data. AddGaussianNoise is a train-only op: apply_preprocess skips it.
struct PreprocessStats {
    std::vector<PreprocessOp> ops;
    std::vector<double> means;
    std::vector<double> stds;
    double noise_sigma = 0.01;
};

/// Applies the ops in order, computing standardization statistics from `ds`
/// itself. Returns the statistics for reuse on held-out data.
PreprocessStats preprocess(Dataset& ds, const std::vector<PreprocessOp>& ops, Rng& rng,
                           double noise_sigma = 0.01);

/// Re-applies recorded preprocessing with train-set statistics; never draws
/// noise.
void apply_preprocess(Dataset& ds, const PreprocessStats& stats);

const char* preprocess_op_name(PreprocessOp op);

struct HoldoutSplit {
    Dataset train;
    Dataset test_inliers;
    Dataset test_outliers;
};

/// One-class-out protocol: rows of `held_class` become the outlier test set;
/// remaining rows are shuffled and split train / test-inlier by
/// `train_fraction`.
HoldoutSplit holdout_split(const Dataset& ds, int held_class, double train_fraction,
                           std::uint64_t seed);

} // namespace mpdr
