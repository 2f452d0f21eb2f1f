// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stssl/error.hpp"

namespace stssl::num {

std::string to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::size_t element_count(const Shape& shape) {
    if (shape.empty()) throw ShapeError("empty shape");
    std::size_t n = 1;
    for (auto d : shape) {
        if (d == 0) throw ShapeError("zero dimension in shape " + to_string(shape));
        n *= d;
    }
    return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("shape " + to_string(shape_) + " does not hold " + std::to_string(data_.size()) +
                         " values");
    }
}

Tensor Tensor::from(std::initializer_list<double> values) {
    return Tensor(Shape{values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(m * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw ShapeError("ragged matrix literal");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor(Shape{m, n}, std::move(data));
}

double Tensor::item() const {
    if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape_));
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (element_count(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_difference(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("max_abs_difference: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out(Shape{m, n}, 0.0);
    const double* pa = a.raw();
    const double* pb = b.raw();
    double* po = out.raw();
    for (std::size_t i = 0; i < m; ++i) {
        double* row = po + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: rank-2 tensor expected, got " + to_string(a.shape()));
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor out(Shape{n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor tanh_activate(const Tensor& x) {
    Tensor out = x;
    for (auto& v : out.data()) v = std::tanh(v);
    return out;
}

double canonical_sum(std::span<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

namespace detail {

// Shared by the vector and the row-wise tape variant.
void masked_softmax_into(const double* logits, const std::vector<bool>& mask, std::size_t offset,
                         std::size_t n, double* out, std::vector<double>& scratch) {
    double peak = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (mask[offset + j]) {
            peak = std::max(peak, logits[j]);
            any = true;
        }
    }
    if (!any) throw ContractError("masked_softmax: empty neighborhood (mask all false)");
    scratch.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (mask[offset + j]) {
            out[j] = std::exp(logits[j] - peak);
            scratch.push_back(out[j]);
        } else {
            out[j] = 0.0;
        }
    }
    const double z = canonical_sum(scratch);
    for (std::size_t j = 0; j < n; ++j) {
        if (mask[offset + j]) out[j] /= z;
    }
}

} // namespace detail

Tensor masked_softmax(const Tensor& logits, const std::vector<bool>& mask) {
    if (logits.rank() != 1 || mask.size() != logits.size()) {
        throw ShapeError("masked_softmax: logits " + to_string(logits.shape()) + " with mask of " +
                         std::to_string(mask.size()));
    }
    Tensor out(logits.shape());
    std::vector<double> scratch;
    detail::masked_softmax_into(logits.raw(), mask, 0, logits.size(), out.raw(), scratch);
    return out;
}

} // namespace stssl::num
