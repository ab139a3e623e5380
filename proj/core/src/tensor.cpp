#include "mpdr/tensor.hpp"

#include <cmath>
#include <sstream>

#include "mpdr/error.hpp"

namespace mpdr {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_product(shape_), 0.0) {
    if (shape_.empty() || shape_.size() > 2) {
        throw ContractError("tensor rank must be 1 or 2, got shape " + mpdr::shape_string(shape_));
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_.empty() || shape_.size() > 2) {
        throw ContractError("tensor rank must be 1 or 2, got shape " + mpdr::shape_string(shape_));
    }
    if (values_.size() != shape_product(shape_)) {
        throw ContractError("tensor shape " + mpdr::shape_string(shape_) + " needs " +
                            std::to_string(shape_product(shape_)) + " values, got " +
                            std::to_string(values_.size()));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

std::size_t Tensor::rows() const { return rank() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const { return rank() == 2 ? shape_[1] : shape_[0]; }

double& Tensor::at(std::size_t r, std::size_t c) {
    return values_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
}

double Tensor::item() const {
    if (numel() != 1) {
        throw ContractError("item() on tensor of shape " + shape_string());
    }
    return values_[0];
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::row(std::size_t r) const {
    std::size_t c = cols();
    std::vector<double> out(c);
    for (std::size_t j = 0; j < c; ++j) out[j] = values_[r * c + j];
    return Tensor::vector(std::move(out));
}

void Tensor::set_row(std::size_t r, const Tensor& v) {
    std::size_t c = cols();
    if (v.numel() != c) {
        throw ContractError("set_row: row length " + std::to_string(v.numel()) +
                            " does not match width " + std::to_string(c));
    }
    for (std::size_t j = 0; j < c; ++j) values_[r * c + j] = v[j];
}

Tensor Tensor::gather_rows(const std::vector<std::size_t>& indices) const {
    std::size_t c = cols();
    Tensor out({indices.size(), c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows()) {
            throw ContractError("gather_rows: index " + std::to_string(indices[i]) +
                                " out of range for " + std::to_string(rows()) + " rows");
        }
        for (std::size_t j = 0; j < c; ++j) out.values_[i * c + j] = values_[indices[i] * c + j];
    }
    return out;
}

void Tensor::scatter_rows(const std::vector<std::size_t>& indices, const Tensor& src) {
    std::size_t c = cols();
    if (src.cols() != c || src.rows() != indices.size()) {
        throw ContractError("scatter_rows: source shape " + src.shape_string() +
                            " does not match " + std::to_string(indices.size()) +
                            " rows of width " + std::to_string(c));
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        for (std::size_t j = 0; j < c; ++j) values_[indices[i] * c + j] = src.values_[i * c + j];
    }
}

std::string Tensor::shape_string() const { return mpdr::shape_string(shape_); }

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

} // namespace mpdr
