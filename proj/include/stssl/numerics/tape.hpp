// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stssl/numerics/tensor.hpp"

namespace stssl::num {

/// A learned tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor gradient;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), gradient(value.shape(), 0.0) {}

    void zero_gradient() { gradient.fill(0.0); }
};

void zero_gradients(std::span<Parameter* const> params);

class Tape;

/// Handle to a node on a tape.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    double item() const { return value().item(); }
};

/// Records primitive operations in execution order. backward() walks the
/// record in exact reverse and adds d(loss)/d(param) into each bound
/// Parameter's gradient. A tape is single-threaded; build one per forward
/// pass.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

    /// When grad is disabled every node is recorded without a backward rule.
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Leaf bound to p; repeated binds of the same parameter share one node.
    Var param(Parameter& p);
    /// Leaf holding a copy of p's value that receives no gradient.
    Var frozen(const Parameter& p) { return constant(p.value); }

    /// Adds a computed node. `inputs` decides whether the node needs a
    /// backward rule at all.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
    Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

    void backward(Var loss);

    const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
    const Tensor& grad(std::uint32_t id) const { return nodes_[id].grad; }
    /// Gradient buffer of an input, allocated on first use. Only valid during
    /// backward.
    Tensor& grad_of(Var v);
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    bool grad_enabled() const noexcept { return grad_enabled_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    /// Node ids visited by the last backward(), in visit order.
    const std::vector<std::uint32_t>& last_backward_order() const { return order_; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        Parameter* param = nullptr;
        BackwardFn backward;
    };

    Var push(Node node);

    bool grad_enabled_;
    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, std::uint32_t> bound_;
    std::vector<std::uint32_t> order_;
};

// Differentiable primitives. All inputs must live on the same tape.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// x[m×n] + bias[1×n] broadcast over rows.
Var add_row_bias(Var x, Var bias);
Var scale(Var x, double factor);
Var tanh(Var x);
Var sigmoid(Var x);
Var sum(Var x);
/// e·eᵀ for e[n×d].
Var gram(Var e);
/// Row-wise masked softmax of logits[n×n]; mask is row-major n×n.
Var masked_softmax_rows(Var logits, const std::vector<bool>& mask);
/// weights[n×n] · h[n×d] with each node-axis reduction summed canonically.
Var aggregate_neighbors(Var weights, Var h);
/// Stack 2-D vars with equal column counts along rows.
Var concat_rows(const std::vector<Var>& parts);
/// Mean of (pred − target)² over entries where mask is true.
Var masked_mse(Var pred, const Tensor& target, const std::vector<bool>& mask);
/// Mean over pairs (p, q) of ‖row_p − row_q‖²; a constant 0 when pairs is
/// empty.
Var mean_pair_distance(Var rows, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double c, Var x) { return scale(x, c); }

} // namespace stssl::num
