// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace iwaqg {

std::string shape_to_string(const Shape& shape) {
    return fmt::format("[{}]", fmt::join(shape, "x"));
}

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) {
        throw DimensionError("tensor shape must have at least one dimension");
    }
    if (std::any_of(shape.begin(), shape.end(), [](std::size_t d) { return d == 0; })) {
        throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    values_.assign(shape_size(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    check_shape(shape_);
    if (shape_size(shape_) != values_.size()) {
        throw DimensionError(fmt::format("shape {} needs {} values, got {}", shape_to_string(shape_),
                                         shape_size(shape_), values_.size()));
    }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
    const auto n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
    if (rank() == 1) {
        return 1;
    }
    if (rank() != 2) {
        throw DimensionError("rows() needs a rank-1 or rank-2 tensor, got " + shape_to_string(shape_));
    }
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() == 1) {
        return shape_[0];
    }
    if (rank() != 2) {
        throw DimensionError("cols() needs a rank-1 or rank-2 tensor, got " + shape_to_string(shape_));
    }
    return shape_[1];
}

std::span<double> Tensor::grad() {
    if (!grad_) {
        grad_.emplace(values_.size(), 0.0);
    }
    return *grad_;
}

std::span<const double> Tensor::grad() const {
    if (!grad_) {
        throw std::logic_error("tensor has no gradient slot");
    }
    return *grad_;
}

void Tensor::zero_grad() {
    if (grad_) {
        std::fill(grad_->begin(), grad_->end(), 0.0);
    } else {
        grad_.emplace(values_.size(), 0.0);
    }
}

bool Tensor::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace iwaqg
