#include "mpdr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpdr/error.hpp"

namespace mpdr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Radial band of the benchmark outliers, interior and exterior of the unit
// manifold.
constexpr double kOutlierInnerLo = 0.1;
constexpr double kOutlierInnerHi = 0.6;
constexpr double kOutlierOuterLo = 1.4;
constexpr double kOutlierOuterHi = 2.0;
constexpr double kInlierRadialNoise = 0.01;

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

} // namespace

Dataset make_eight_gaussians(std::size_t n, double radius, double stddev, std::uint64_t seed) {
    if (n < 8) {
        throw ConfigError("make_eight_gaussians: need at least 8 samples, got " +
                          std::to_string(n));
    }
    if (stddev < 0.0) throw ConfigError("make_eight_gaussians: negative stddev");
    Rng rng(seed);
    Dataset ds;
    ds.rows = Tensor({n, 2});
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t k = rng.uniform_index(8);
        double angle = kTwoPi * static_cast<double>(k) / 8.0;
        ds.rows.at(i, 0) = radius * std::cos(angle) + stddev * rng.normal();
        ds.rows.at(i, 1) = radius * std::sin(angle) + stddev * rng.normal();
        ds.labels[i] = static_cast<int>(k);
    }
    std::ostringstream meta;
    meta << "eight_gaussians n=" << n << " radius=" << radius << " std=" << stddev
         << " seed=" << seed;
    ds.meta = meta.str();
    return ds;
}

std::vector<double> true_density_eight_gaussians(const Tensor& points, double radius,
                                                 double stddev) {
    if (stddev <= 0.0) throw ConfigError("true_density_eight_gaussians: stddev must be positive");
    if (points.cols() != 2) {
        throw ConfigError("true_density_eight_gaussians: points must be 2D, got " +
                          points.shape_string());
    }
    double var = stddev * stddev;
    double norm = 1.0 / (8.0 * kTwoPi * var);
    std::vector<double> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        double px = points.at(i, 0);
        double py = points.at(i, 1);
        double acc = 0.0;
        for (int k = 0; k < 8; ++k) {
            double angle = kTwoPi * k / 8.0;
            double dx = px - radius * std::cos(angle);
            double dy = py - radius * std::sin(angle);
            acc += std::exp(-(dx * dx + dy * dy) / (2.0 * var));
        }
        out[i] = norm * acc;
    }
    return out;
}

Dataset make_manifold_benchmark(ManifoldKind kind, std::size_t dim, std::size_t n_in,
                                std::size_t n_out, std::uint64_t seed) {
    if (kind == ManifoldKind::Circle && dim < 2) {
        throw ConfigError("make_manifold_benchmark: circle needs dim >= 2");
    }
    if (dim == 0 || n_in == 0) {
        throw ConfigError("make_manifold_benchmark: need a positive dim and n_in");
    }
    Rng rng(seed);

    // Orthonormal frame carrying the plane of the circle into the ambient
    // space. For dim == 2 this is the identity, keeping the 2D case exact.
    std::vector<double> q1(dim, 0.0), q2(dim, 0.0);
    if (kind == ManifoldKind::Circle) {
        if (dim == 2) {
            q1[0] = 1.0;
            q2[1] = 1.0;
        } else {
            double n1 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                q1[d] = rng.normal();
                n1 += q1[d] * q1[d];
            }
            n1 = std::sqrt(n1);
            for (std::size_t d = 0; d < dim; ++d) q1[d] /= n1;
            double dot = 0.0, n2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                q2[d] = rng.normal();
                dot += q2[d] * q1[d];
            }
            for (std::size_t d = 0; d < dim; ++d) {
                q2[d] -= dot * q1[d];
                n2 += q2[d] * q2[d];
            }
            n2 = std::sqrt(n2);
            for (std::size_t d = 0; d < dim; ++d) q2[d] /= n2;
        }
    }

    std::size_t n = n_in + n_out;
    Dataset ds;
    ds.rows = Tensor({n, dim});
    ds.labels.resize(n);

    auto emit = [&](std::size_t row, double rad) {
        if (kind == ManifoldKind::Circle) {
            double angle = rng.uniform(0.0, kTwoPi);
            double cx = rad * std::cos(angle);
            double cy = rad * std::sin(angle);
            for (std::size_t d = 0; d < dim; ++d) ds.rows.at(row, d) = cx * q1[d] + cy * q2[d];
        } else {
            double norm = 0.0;
            std::vector<double> dir(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                dir[d] = rng.normal();
                norm += dir[d] * dir[d];
            }
            norm = std::sqrt(norm);
            for (std::size_t d = 0; d < dim; ++d) ds.rows.at(row, d) = rad * dir[d] / norm;
        }
    };

    for (std::size_t i = 0; i < n_in; ++i) {
        emit(i, 1.0 + kInlierRadialNoise * rng.normal());
        ds.labels[i] = 0;
    }
    for (std::size_t i = 0; i < n_out; ++i) {
        // Alternate interior and exterior outliers.
        double rad = (i % 2 == 0) ? rng.uniform(kOutlierInnerLo, kOutlierInnerHi)
                                  : rng.uniform(kOutlierOuterLo, kOutlierOuterHi);
        emit(n_in + i, rad);
        ds.labels[n_in + i] = 1;
    }
    std::ostringstream meta;
    meta << (kind == ManifoldKind::Circle ? "circle" : "sphere_shell") << " dim=" << dim
         << " n_in=" << n_in << " n_out=" << n_out << " seed=" << seed;
    ds.meta = meta.str();
    return ds;
}

namespace {

bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    // Tolerate surrounding spaces.
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

} // namespace

Dataset load_csv(const std::string& path, bool label_col_last) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t width = 0;
    std::size_t line_no = 0;
    bool first_content_line = true;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first_content_line && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        if (line.empty()) continue;

        std::vector<std::string> cells = split_cells(line);
        std::vector<double> parsed(cells.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], parsed[c])) {
                numeric = false;
                bad_col = c;
                break;
            }
        }
        if (first_content_line) {
            first_content_line = false;
            if (!numeric) continue; // header row
        }
        if (!numeric) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": column " +
                             std::to_string(bad_col + 1) + ": cannot parse '" + cells[bad_col] +
                             "' as a number");
        }
        if (width == 0) {
            width = parsed.size();
            if (label_col_last && width < 2) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": need at least 2 columns when the last column holds labels");
            }
        } else if (parsed.size() != width) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " columns, got " +
                             std::to_string(parsed.size()));
        }
        if (label_col_last) {
            double lv = parsed.back();
            if (std::nearbyint(lv) != lv) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": label column value " + cells.back() + " is not an integer");
            }
            labels.push_back(static_cast<int>(lv));
            parsed.pop_back();
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    std::size_t d = rows[0].size();
    Dataset ds;
    ds.rows = Tensor({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.rows.at(i, j) = rows[i][j];
    }
    ds.labels = std::move(labels);
    ds.meta = "csv " + path;
    if (!ds.rows.all_finite()) throw ParseError(path + ": non-finite values in data");
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    char buf[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.rows.at(i, j));
            if (j) out << ',';
            out << buf;
        }
        if (ds.has_labels()) out << ',' << ds.labels[i];
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

const char* preprocess_op_name(PreprocessOp op) {
    switch (op) {
        case PreprocessOp::Standardize: return "standardize";
        case PreprocessOp::SphereNormalize: return "sphere_normalize";
        case PreprocessOp::AddGaussianNoise: return "add_gaussian_noise";
    }
    return "unknown";
}

namespace {

void standardize_with(Dataset& ds, const std::vector<double>& means,
                      const std::vector<double>& stds) {
    if (means.size() != ds.dim()) {
        throw ConfigError("standardize: statistics cover " + std::to_string(means.size()) +
                          " columns but data has " + std::to_string(ds.dim()));
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            ds.rows.at(i, j) = (ds.rows.at(i, j) - means[j]) / stds[j];
        }
    }
}

void sphere_normalize(Dataset& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            double v = ds.rows.at(i, j);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            throw DegenerateInputError("sphere normalization of near-zero row " +
                                       std::to_string(i));
        }
        for (std::size_t j = 0; j < ds.dim(); ++j) ds.rows.at(i, j) /= norm;
    }
}

} // namespace

PreprocessStats preprocess(Dataset& ds, const std::vector<PreprocessOp>& ops, Rng& rng,
                           double noise_sigma) {
    if (ds.size() == 0) throw ConfigError("preprocess: empty dataset");
    PreprocessStats stats;
    stats.ops = ops;
    stats.noise_sigma = noise_sigma;
    for (PreprocessOp op : ops) {
        switch (op) {
            case PreprocessOp::Standardize: {
                std::size_t n = ds.size(), d = ds.dim();
                stats.means.assign(d, 0.0);
                stats.stds.assign(d, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) stats.means[j] += ds.rows.at(i, j);
                }
                for (std::size_t j = 0; j < d; ++j) stats.means[j] /= static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        double v = ds.rows.at(i, j) - stats.means[j];
                        stats.stds[j] += v * v;
                    }
                }
                for (std::size_t j = 0; j < d; ++j) {
                    stats.stds[j] = std::sqrt(stats.stds[j] / static_cast<double>(n));
                    if (stats.stds[j] < 1e-12) {
                        throw ConfigError("standardize: column " + std::to_string(j) +
                                          " has zero variance");
                    }
                }
                standardize_with(ds, stats.means, stats.stds);
                break;
            }
            case PreprocessOp::SphereNormalize:
                sphere_normalize(ds);
                break;
            case PreprocessOp::AddGaussianNoise: {
                if (noise_sigma < 0.0) throw ConfigError("preprocess: negative noise sigma");
                for (std::size_t i = 0; i < ds.rows.numel(); ++i) {
                    ds.rows[i] += noise_sigma * rng.normal();
                }
                break;
            }
        }
    }
    return stats;
}

void apply_preprocess(Dataset& ds, const PreprocessStats& stats) {
    for (PreprocessOp op : stats.ops) {
        switch (op) {
            case PreprocessOp::Standardize:
                standardize_with(ds, stats.means, stats.stds);
                break;
            case PreprocessOp::SphereNormalize:
                sphere_normalize(ds);
                break;
            case PreprocessOp::AddGaussianNoise:
                break; // train-only regularizer, never applied to held-out data
        }
    }
}

HoldoutSplit holdout_split(const Dataset& ds, int held_class, double train_fraction,
                           std::uint64_t seed) {
    if (!ds.has_labels()) throw ConfigError("holdout_split: dataset has no labels");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("holdout_split: train_fraction must be in (0, 1)");
    }
    std::vector<std::size_t> held, rest;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.labels[i] == held_class ? held : rest).push_back(i);
    }
    if (held.empty()) {
        throw ConfigError("holdout_split: class " + std::to_string(held_class) +
                          " not present in the dataset");
    }
    if (rest.size() < 2) {
        throw ConfigError("holdout_split: not enough non-held rows to split");
    }

    Rng rng(seed);
    std::vector<std::size_t> order = shuffled_indices(rest.size(), rng);
    std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(rest.size()));
    n_train = std::min(std::max<std::size_t>(n_train, 1), rest.size() - 1);

    auto take = [&](const std::vector<std::size_t>& src, std::size_t from, std::size_t to,
                    bool via_order) {
        std::vector<std::size_t> idx;
        idx.reserve(to - from);
        for (std::size_t i = from; i < to; ++i) idx.push_back(via_order ? src[order[i]] : src[i]);
        Dataset out;
        out.rows = ds.rows.gather_rows(idx);
        out.labels.reserve(idx.size());
        for (std::size_t i : idx) out.labels.push_back(ds.labels[i]);
        return out;
    };

    HoldoutSplit split;
    split.train = take(rest, 0, n_train, true);
    split.test_inliers = take(rest, n_train, rest.size(), true);
    split.test_outliers = take(held, 0, held.size(), false);
    split.train.meta = ds.meta + " [train, held=" + std::to_string(held_class) + "]";
    split.test_inliers.meta = ds.meta + " [test inliers]";
    split.test_outliers.meta = ds.meta + " [test outliers, class " + std::to_string(held_class) + "]";
    return split;
}

} // namespace mpdr
