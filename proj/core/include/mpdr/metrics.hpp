#pragma once

#include <functional>
#include <vector>

#include "mpdr/energy.hpp"

namespace mpdr {

/// Anomaly scores grouped by ground truth. Higher scores should mean "more
/// anomalous"; the metrics count score pairs, so any common scale works.
struct ScoredSamples {
    std::vector<double> normal;
    std::vector<double> anomalous;

    void validate() const;
};

/// Fraction of (anomalous, normal) pairs ranked correctly. Ties count as
/// incorrectly ranked (strict comparison), which differs from the 0.5-credit
/// convention of most libraries.
double auroc(const ScoredSamples& s);

/// AUROC restricted to the floor(p * N_normal) highest-scoring normal
/// samples: the region with false positive rate in [0, p].
double pauroc(const ScoredSamples& s, double p);

/// Area under the precision-recall curve with anomalies as the positive
/// class, as average precision over the threshold sweep.
double aupr(const ScoredSamples& s);

/// Cell-centered square grid with the reference density evaluated on it.
struct DensityGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t resolution = 0;
    Tensor points;                    // [resolution^2, 2]
    std::vector<double> true_density; // one value per grid point

    double cell_area() const;
    void validate() const;
};

/// Evaluates `density_fn` (points -> densities) at the cell centers of
/// [lo,hi]^2.
DensityGrid make_density_grid(
    double lo, double hi, std::size_t resolution,
    const std::function<std::vector<double>(const Tensor&)>& density_fn);

/// l1 distance between the model's Boltzmann density and the reference
/// density, both normalized to sum to one over the grid.
double density_l1(const EnergyModel& model, const DensityGrid& grid);

} // namespace mpdr
