#include "mpdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mpdr/error.hpp"

namespace mpdr {

void ScoredSamples::validate() const {
    if (normal.empty() || anomalous.empty()) {
        throw ConfigError("scored samples: both classes must be non-empty");
    }
    for (double v : normal) {
        if (!std::isfinite(v)) throw ConfigError("scored samples: non-finite normal score");
    }
    for (double v : anomalous) {
        if (!std::isfinite(v)) throw ConfigError("scored samples: non-finite anomalous score");
    }
}

namespace {

// Pairs (a, n) with a > n, counted exactly. `normals_sorted` ascending.
std::uint64_t correct_pairs(const std::vector<double>& anomalous,
                            const std::vector<double>& normals_sorted) {
    std::uint64_t count = 0;
    for (double a : anomalous) {
        count += static_cast<std::uint64_t>(
            std::lower_bound(normals_sorted.begin(), normals_sorted.end(), a) -
            normals_sorted.begin());
    }
    return count;
}

} // namespace

double auroc(const ScoredSamples& s) {
    s.validate();
    std::vector<double> sorted = s.normal;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t count = correct_pairs(s.anomalous, sorted);
    return static_cast<double>(count) /
           (static_cast<double>(s.normal.size()) * static_cast<double>(s.anomalous.size()));
}

double pauroc(const ScoredSamples& s, double p) {
    s.validate();
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("pauroc: p must be in (0, 1]");
    std::size_t m = static_cast<std::size_t>(
        std::floor(p * static_cast<double>(s.normal.size())));
    if (m == 0) {
        throw ConfigError("pauroc: p = " + std::to_string(p) + " selects zero of the " +
                          std::to_string(s.normal.size()) + " normal samples");
    }

    // The m top-scoring normals are the false positives admitted as the
    // threshold drops from the top: false positive rate 0 through p.
    std::vector<double> top = s.normal;
    std::sort(top.begin(), top.end(), std::greater<>());
    top.resize(m);
    std::sort(top.begin(), top.end());
    std::uint64_t count = correct_pairs(s.anomalous, top);
    return static_cast<double>(count) /
           (static_cast<double>(m) * static_cast<double>(s.anomalous.size()));
}

double aupr(const ScoredSamples& s) {
    s.validate();
    // Threshold sweep over distinct scores, descending; anomalies positive.
    std::vector<std::pair<double, bool>> scored; // (score, is_anomalous)
    scored.reserve(s.normal.size() + s.anomalous.size());
    for (double v : s.anomalous) scored.emplace_back(v, true);
    for (double v : s.normal) scored.emplace_back(v, false);
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double n_pos = static_cast<double>(s.anomalous.size());
    std::size_t tp = 0, fp = 0;
    double area = 0.0, prev_recall = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) {
            scored[j].second ? ++tp : ++fp;
            ++j;
        }
        double recall = static_cast<double>(tp) / n_pos;
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

double DensityGrid::cell_area() const {
    double side = (hi - lo) / static_cast<double>(resolution);
    return side * side;
}

void DensityGrid::validate() const {
    if (!(lo < hi) || resolution == 0) {
        throw ConfigError("density grid: need lo < hi and a positive resolution");
    }
    std::size_t n = resolution * resolution;
    if (points.rank() != 2 || points.rows() != n || points.cols() != 2 ||
        true_density.size() != n) {
        throw ConfigError("density grid: points and densities must cover resolution^2 cells");
    }
    for (double d : true_density) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw ConfigError("density grid: reference density must be finite and non-negative");
        }
    }
}

DensityGrid make_density_grid(
    double lo, double hi, std::size_t resolution,
    const std::function<std::vector<double>(const Tensor&)>& density_fn) {
    if (!(lo < hi) || resolution == 0) {
        throw ConfigError("density grid: need lo < hi and a positive resolution");
    }
    DensityGrid grid;
    grid.lo = lo;
    grid.hi = hi;
    grid.resolution = resolution;
    double side = (hi - lo) / static_cast<double>(resolution);
    grid.points = Tensor({resolution * resolution, 2});
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            std::size_t i = r * resolution + c;
            grid.points.at(i, 0) = lo + (static_cast<double>(c) + 0.5) * side;
            grid.points.at(i, 1) = lo + (static_cast<double>(r) + 0.5) * side;
        }
    }
    grid.true_density = density_fn(grid.points);
    grid.validate();
    return grid;
}

double density_l1(const EnergyModel& model, const DensityGrid& grid) {
    grid.validate();
    Tensor energies = model.energy(grid.points);

    // exp overflows long before the double range ends; anchoring at the
    // minimum energy keeps the largest weight at exactly 1.
    double e_min = energies[0];
    for (std::size_t i = 1; i < energies.numel(); ++i) e_min = std::min(e_min, energies[i]);

    double delta = grid.cell_area();
    std::vector<double> weight(energies.numel());
    double model_mass = 0.0, true_mass = 0.0;
    for (std::size_t i = 0; i < energies.numel(); ++i) {
        weight[i] = std::exp(-(energies[i] - e_min));
        model_mass += weight[i] * delta;
        true_mass += grid.true_density[i] * delta;
    }
    if (!(model_mass > 0.0) || !std::isfinite(model_mass)) {
        throw NumericError("density_l1: model weights do not normalize");
    }
    if (!(true_mass > 0.0)) {
        throw ConfigError("density_l1: reference density has zero mass on the grid");
    }

    double err = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        err += std::fabs(weight[i] / model_mass - grid.true_density[i] / true_mass) * delta;
    }
    return err;
}

} // namespace mpdr
