#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mpdr {

/// Dense row-major array of 64-bit reals with an explicit shape.
///
/// Rank 1 and rank 2 cover everything in this library: vectors, parameter
/// matrices, and sample batches ([rows, dim]). A scalar is a rank-1 tensor
/// of one element.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor with the given shape.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor zeros_like(const Tensor& other);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return values_.size(); }

    /// Leading dimension; a rank-1 tensor counts as a single row.
    std::size_t rows() const;
    /// Trailing dimension; for rank-1 this is the length.
    std::size_t cols() const;

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    /// Value of a one-element tensor.
    double item() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    /// Copy of row r as a rank-1 tensor.
    Tensor row(std::size_t r) const;
    void set_row(std::size_t r, const Tensor& v);

    /// Rows selected by index, as a new [indices.size(), cols] tensor.
    Tensor gather_rows(const std::vector<std::size_t>& indices) const;
    /// Writes rows of `src` (one per index) into this tensor.
    void scatter_rows(const std::vector<std::size_t>& indices, const Tensor& src);

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

} // namespace mpdr
