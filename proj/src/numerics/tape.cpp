// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/numerics/tape.hpp"

#include <cmath>

#include "stssl/error.hpp"

namespace stssl::num {

namespace detail {
void masked_softmax_into(const double* logits, const std::vector<bool>& mask, std::size_t offset,
                         std::size_t n, double* out, std::vector<double>& scratch);
}

void zero_gradients(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->zero_gradient();
}

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    if (auto it = bound_.find(&p); it != bound_.end()) return Var{this, it->second};
    Node n;
    n.value = p.value;
    n.requires_grad = grad_enabled_;
    n.param = grad_enabled_ ? &p : nullptr;
    Var v = push(std::move(n));
    bound_.emplace(&p, v.id);
    return v;
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    if (grad_enabled_) {
        for (const Var& in : inputs) {
            if (in.tape != this) throw ContractError("operation mixes vars from different tapes");
            if (nodes_[in.id].requires_grad) n.requires_grad = true;
        }
    }
    if (n.requires_grad) n.backward = std::move(fn);
    return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Tensor& Tape::grad_of(Var v) {
    Node& n = nodes_[v.id];
    if (!n.has_grad) {
        n.grad = Tensor(n.value.shape(), 0.0);
        n.has_grad = true;
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this || loss.id >= nodes_.size()) {
        throw ContractError("backward: loss is not a node of this tape");
    }
    if (nodes_[loss.id].value.size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + to_string(nodes_[loss.id].value.shape()));
    }
    for (auto& n : nodes_) n.has_grad = false;
    order_.clear();
    grad_of(loss)[0] = 1.0;
    for (std::uint32_t id = loss.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.has_grad || !n.requires_grad) continue;
        order_.push_back(id);
        if (n.backward) n.backward(*this, id);
        if (n.param) {
            Tensor& g = nodes_[id].grad;
            Tensor& acc = n.param->gradient;
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
        }
    }
}

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
}

void require_rank2(const char* op, const Tensor& a) {
    if (a.rank() != 2) throw ShapeError(std::string(op) + ": rank-2 tensor expected, got " + to_string(a.shape()));
}

} // namespace

Var matmul(Var a, Var b) {
    Tape& t = *a.tape;
    Tensor out = num::matmul(a.value(), b.value());
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& av = tp.value(a.id);
        const Tensor& bv = tp.value(b.id);
        const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
        if (tp.requires_grad(a)) {
            Tensor& ga = tp.grad_of(a);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * bv[p * n + j];
                    ga[i * k + p] += s;
                }
        }
        if (tp.requires_grad(b)) {
            Tensor& gb = tp.grad_of(b);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double av_ip = av[i * k + p];
                    double* dst = gb.raw() + p * n;
                    const double* src = g.raw() + i * n;
                    for (std::size_t j = 0; j < n; ++j) dst[j] += av_ip * src[j];
                }
        }
    });
}

Var add(Var a, Var b) {
    require_same_shape("add", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        for (Var v : {a, b}) {
            if (!tp.requires_grad(v)) continue;
            Tensor& gv = tp.grad_of(v);
            for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
        }
    });
}

Var sub(Var a, Var b) {
    require_same_shape("sub", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.requires_grad(a)) {
            Tensor& ga = tp.grad_of(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (tp.requires_grad(b)) {
            Tensor& gb = tp.grad_of(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    require_same_shape("mul", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return a.tape->record(std::move(out), {a, b}, [a, b](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.requires_grad(a)) {
            Tensor& ga = tp.grad_of(a);
            const Tensor& bv = tp.value(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (tp.requires_grad(b)) {
            Tensor& gb = tp.grad_of(b);
            const Tensor& av = tp.value(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var add_row_bias(Var x, Var bias) {
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    require_rank2("add_row_bias", xv);
    if (bv.size() != xv.dim(1)) {
        throw ShapeError("add_row_bias: " + to_string(xv.shape()) + " with bias " + to_string(bv.shape()));
    }
    Tensor out = xv;
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
    return x.tape->record(std::move(out), {x, bias}, [x, bias, m, n](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.requires_grad(x)) {
            Tensor& gx = tp.grad_of(x);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (tp.requires_grad(bias)) {
            Tensor& gb = tp.grad_of(bias);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
    });
}

Var scale(Var x, double factor) {
    Tensor out = x.value();
    for (auto& v : out.data()) v *= factor;
    return x.tape->record(std::move(out), {x}, [x, factor](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gx = tp.grad_of(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    });
}

Var tanh(Var x) {
    Tensor out = tanh_activate(x.value());
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& y = tp.value(self);
        Tensor& gx = tp.grad_of(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var sigmoid(Var x) {
    Tensor out = x.value();
    for (auto& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& y = tp.value(self);
        Tensor& gx = tp.grad_of(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    return x.tape->record(Tensor::scalar(s), {x}, [x](Tape& tp, std::uint32_t self) {
        const double g = tp.grad(self)[0];
        Tensor& gx = tp.grad_of(x);
        for (auto& v : gx.data()) v += g;
    });
}

Var gram(Var e) {
    const Tensor& ev = e.value();
    require_rank2("gram", ev);
    const std::size_t n = ev.dim(0), d = ev.dim(1);
    Tensor out(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += ev[i * d + k] * ev[j * d + k];
            out[i * n + j] = s;
        }
    return e.tape->record(std::move(out), {e}, [e, n, d](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& ev = tp.value(e.id);
        Tensor& ge = tp.grad_of(e);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double w = g[i * n + j] + g[j * n + i];
                for (std::size_t k = 0; k < d; ++k) ge[i * d + k] += w * ev[j * d + k];
            }
    });
}

Var masked_softmax_rows(Var logits, const std::vector<bool>& mask) {
    const Tensor& lv = logits.value();
    require_rank2("masked_softmax_rows", lv);
    const std::size_t n = lv.dim(0), m = lv.dim(1);
    if (mask.size() != n * m) {
        throw ShapeError("masked_softmax_rows: logits " + to_string(lv.shape()) + " with mask of " +
                         std::to_string(mask.size()));
    }
    Tensor out(lv.shape());
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        detail::masked_softmax_into(lv.raw() + i * m, mask, i * m, m, out.raw() + i * m, scratch);
    }
    return logits.tape->record(std::move(out), {logits}, [logits, n, m](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& y = tp.value(self);
        Tensor& gl = tp.grad_of(logits);
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
            for (std::size_t j = 0; j < m; ++j) gl[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
        }
    });
}

Var aggregate_neighbors(Var weights, Var h) {
    const Tensor& wv = weights.value();
    const Tensor& hv = h.value();
    require_rank2("aggregate_neighbors", wv);
    require_rank2("aggregate_neighbors", hv);
    if (wv.dim(0) != wv.dim(1) || wv.dim(1) != hv.dim(0)) {
        throw ShapeError("aggregate_neighbors: " + to_string(wv.shape()) + " x " + to_string(hv.shape()));
    }
    const std::size_t n = wv.dim(0), d = hv.dim(1);
    Tensor out(Shape{n, d});
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t j = 0; j < n; ++j) terms[j] = wv[i * n + j] * hv[j * d + c];
            out[i * d + c] = canonical_sum(terms);
        }
    return weights.tape->record(std::move(out), {weights, h}, [weights, h, n, d](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& wv = tp.value(weights.id);
        const Tensor& hv = tp.value(h.id);
        if (tp.requires_grad(weights)) {
            Tensor& gw = tp.grad_of(weights);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < d; ++c) s += g[i * d + c] * hv[j * d + c];
                    gw[i * n + j] += s;
                }
        }
        if (tp.requires_grad(h)) {
            Tensor& gh = tp.grad_of(h);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double w = wv[i * n + j];
                    for (std::size_t c = 0; c < d; ++c) gh[j * d + c] += w * g[i * d + c];
                }
        }
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no parts");
    const std::size_t cols = parts.front().value().rank() == 2 ? parts.front().value().dim(1) : 0;
    std::size_t rows = 0;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        if (v.rank() != 2 || v.dim(1) != cols) {
            throw ShapeError("concat_rows: part " + to_string(v.shape()) + " with " + std::to_string(cols) +
                             " columns expected");
        }
        rows += v.dim(0);
    }
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const Var& p : parts) data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    Tape& t = *parts.front().tape;
    return t.record(Tensor(Shape{rows, cols}, std::move(data)), parts, [parts](Tape& tp, std::uint32_t self) {
        const Tensor& g = tp.grad(self);
        std::size_t offset = 0;
        for (const Var& p : parts) {
            const std::size_t len = tp.value(p.id).size();
            if (tp.requires_grad(p)) {
                Tensor& gp = tp.grad_of(p);
                for (std::size_t i = 0; i < len; ++i) gp[i] += g[offset + i];
            }
            offset += len;
        }
    });
}

Var masked_mse(Var pred, const Tensor& target, const std::vector<bool>& mask) {
    const Tensor& pv = pred.value();
    if (pv.size() != target.size() || mask.size() != target.size()) {
        throw ShapeError("masked_mse: prediction " + to_string(pv.shape()) + ", target " + to_string(target.shape()) +
                         ", mask of " + std::to_string(mask.size()));
    }
    std::size_t count = 0;
    double s = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (!mask[i]) continue;
        const double r = pv[i] - target[i];
        s += r * r;
        ++count;
    }
    if (count == 0) throw ContractError("masked_mse: no valid entries, loss undefined");
    const double inv = 1.0 / static_cast<double>(count);
    return pred.tape->record(Tensor::scalar(s * inv), {pred},
                             [pred, target, mask, inv](Tape& tp, std::uint32_t self) {
                                 const double g = tp.grad(self)[0];
                                 const Tensor& pv = tp.value(pred.id);
                                 Tensor& gp = tp.grad_of(pred);
                                 for (std::size_t i = 0; i < pv.size(); ++i) {
                                     if (mask[i]) gp[i] += g * 2.0 * (pv[i] - target[i]) * inv;
                                 }
                             });
}

Var mean_pair_distance(Var rows, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    const Tensor& rv = rows.value();
    require_rank2("mean_pair_distance", rv);
    if (pairs.empty()) return rows.tape->constant(Tensor::scalar(0.0));
    const std::size_t n = rv.dim(0), d = rv.dim(1);
    double s = 0.0;
    for (auto [p, q] : pairs) {
        if (p >= n || q >= n) throw ContractError("mean_pair_distance: pair index out of range");
        for (std::size_t c = 0; c < d; ++c) {
            const double r = rv[p * d + c] - rv[q * d + c];
            s += r * r;
        }
    }
    const double inv = 1.0 / static_cast<double>(pairs.size());
    return rows.tape->record(Tensor::scalar(s * inv), {rows}, [rows, pairs, inv, d](Tape& tp, std::uint32_t self) {
        const double g = tp.grad(self)[0];
        const Tensor& rv = tp.value(rows.id);
        Tensor& gr = tp.grad_of(rows);
        for (auto [p, q] : pairs) {
            for (std::size_t c = 0; c < d; ++c) {
                const double r = 2.0 * g * inv * (rv[p * d + c] - rv[q * d + c]);
                gr[p * d + c] += r;
                gr[q * d + c] -= r;
            }
        }
    });
}

} // namespace stssl::num
