// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/graph/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "stssl/error.hpp"

namespace stssl::graph {

using num::Parameter;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

void validate(const GnnConfig& c) {
    if (c.layers < 1 || c.hidden < 1 || c.attention_width < 1 || c.horizons < 1 || c.channels < 1 ||
        c.input_steps < 1) {
        throw ContractError("GnnConfig: layer count and widths must be positive");
    }
    if (!(c.gamma_corr > 0.0)) throw ContractError("GnnConfig: gamma_corr must be positive");
    if (!(c.tau_edge >= 0.0 && c.tau_edge < 1.0)) throw ContractError("GnnConfig: tau_edge must lie in [0, 1)");
}

std::vector<Parameter*> Model::parameters() {
    std::vector<Parameter*> out;
    for (auto* g : {&encoder, &gnn, &readout})
        for (auto& p : *g) out.push_back(&p);
    return out;
}

std::vector<const Parameter*> Model::parameters() const {
    std::vector<const Parameter*> out;
    for (auto* g : {&encoder, &gnn, &readout})
        for (auto& p : *g) out.push_back(&p);
    return out;
}

std::vector<Parameter*> Model::encoder_and_gnn() {
    std::vector<Parameter*> out;
    for (auto* g : {&encoder, &gnn})
        for (auto& p : *g) out.push_back(&p);
    return out;
}

namespace {

Parameter uniform(std::string name, Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor v(std::move(shape));
    for (auto& x : v.data()) x = dist(rng);
    return Parameter(std::move(name), std::move(v));
}

Parameter zeros(std::string name, Shape shape) { return Parameter(std::move(name), Tensor(std::move(shape), 0.0)); }

enum EncoderSlot { Wz, Wr, Wh, Uz, Ur, Uh, Bz, Br, Bh };

} // namespace

Model init_model(const GnnConfig& config, RegionGraph graph, std::uint64_t seed) {
    validate(config);
    Model m;
    m.config = config;
    m.graph = std::move(graph);
    std::mt19937_64 rng(seed);
    const auto c = static_cast<std::size_t>(config.channels);
    const auto d = static_cast<std::size_t>(config.hidden);
    const auto de = static_cast<std::size_t>(config.attention_width);
    const auto out = static_cast<std::size_t>(config.horizons) * c;

    for (const char* gate : {"z", "r", "h"}) m.encoder.push_back(uniform(std::string("encoder.W_") + gate, {c, d}, c, rng));
    for (const char* gate : {"z", "r", "h"}) m.encoder.push_back(uniform(std::string("encoder.U_") + gate, {d, d}, d, rng));
    for (const char* gate : {"z", "r", "h"}) m.encoder.push_back(zeros(std::string("encoder.b_") + gate, {1, d}));

    if (config.enable_gnn) {
        for (int k = 0; k < config.layers; ++k) {
            const std::string prefix = "gnn." + std::to_string(k) + ".";
            m.gnn.push_back(uniform(prefix + "W", {d, d}, d, rng));
            m.gnn.push_back(uniform(prefix + "attend", {d, de}, d, rng));
        }
    }
    m.readout.push_back(uniform("readout.weight", {d, out}, d, rng));
    m.readout.push_back(zeros("readout.bias", {1, out}));
    return m;
}

namespace {

template <typename Group>
std::vector<Var> bind_group(Tape& tape, Group& group, bool trainable) {
    std::vector<Var> out;
    out.reserve(group.size());
    for (auto& p : group) out.push_back(trainable ? tape.param(p) : tape.frozen(p));
    return out;
}

} // namespace

Bound bind(Tape& tape, Model& model, Train trainable) {
    return Bound{bind_group(tape, model.encoder, has(trainable, Train::Encoder)),
                 bind_group(tape, model.gnn, has(trainable, Train::Gnn)),
                 bind_group(tape, model.readout, has(trainable, Train::Readout))};
}

Bound bind_frozen(Tape& tape, const Model& model) {
    Bound b;
    for (const auto& p : model.encoder) b.encoder.push_back(tape.frozen(p));
    for (const auto& p : model.gnn) b.gnn.push_back(tape.frozen(p));
    for (const auto& p : model.readout) b.readout.push_back(tape.frozen(p));
    return b;
}

Var encode(Tape& tape, const Bound& bound, const Model& model, const Tensor& input) {
    const auto& cfg = model.config;
    const std::size_t n = model.graph.size();
    const auto c = static_cast<std::size_t>(cfg.channels);
    const auto steps = static_cast<std::size_t>(cfg.input_steps);
    if (input.shape() != Shape{steps, n, c}) {
        throw ContractError("forward: input window " + num::to_string(input.shape()) + " does not match " +
                            num::to_string(Shape{steps, n, c}) + " (steps × regions × channels)");
    }
    if (bound.encoder.size() != 9) throw ContractError("forward: encoder parameters not bound");
    const auto& e = bound.encoder;

    Var h = tape.constant(Tensor(Shape{n, static_cast<std::size_t>(cfg.hidden)}, 0.0));
    const auto stride = n * c;
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<double> slice(input.data().begin() + static_cast<std::ptrdiff_t>(s * stride),
                                  input.data().begin() + static_cast<std::ptrdiff_t>((s + 1) * stride));
        Var x = tape.constant(Tensor(Shape{n, c}, std::move(slice)));
        Var z = num::sigmoid(num::add_row_bias(num::matmul(x, e[Wz]) + num::matmul(h, e[Uz]), e[Bz]));
        Var r = num::sigmoid(num::add_row_bias(num::matmul(x, e[Wr]) + num::matmul(h, e[Ur]), e[Br]));
        Var cand = num::tanh(num::add_row_bias(num::matmul(x, e[Wh]) + num::matmul(num::mul(r, h), e[Uh]), e[Bh]));
        h = h + num::mul(z, cand - h);
    }
    return h;
}

Var readout(Var h_final, const Bound& bound) {
    if (bound.readout.size() != 2) throw ContractError("readout: parameters not bound");
    return num::add_row_bias(num::matmul(h_final, bound.readout[0]), bound.readout[1]);
}

Forward forward(Tape& tape, const Bound& bound, const Model& model, const Tensor& input) {
    Var h = encode(tape, bound, model, input);
    if (model.config.enable_gnn) {
        if (bound.gnn.size() != 2 * static_cast<std::size_t>(model.config.layers)) {
            throw ContractError("forward: gnn parameters not bound");
        }
        for (int k = 0; k < model.config.layers; ++k) {
            Var self_weight = bound.gnn[2 * static_cast<std::size_t>(k)];
            Var attend = bound.gnn[2 * static_cast<std::size_t>(k) + 1];
            Var alpha = compute_attention(num::matmul(h, attend), model.graph);
            h = message_passing_layer(h, model.graph, alpha, self_weight);
        }
    }
    return Forward{readout(h, bound), h};
}

Tensor readout(const Tensor& h_final, const Model& model) {
    Tape tape(false);
    Bound b = bind_frozen(tape, model);
    Tensor flat = readout(tape.constant(h_final), b).value();
    const auto n = h_final.dim(0);
    return flat.reshaped(Shape{n, static_cast<std::size_t>(model.config.horizons),
                               static_cast<std::size_t>(model.config.channels)});
}

Tensor gnn_forward(const Model& model, const Tensor& input) {
    Tape tape(false);
    Bound b = bind_frozen(tape, model);
    Tensor flat = forward(tape, b, model, input).forecast.value();
    return flat.reshaped(Shape{model.graph.size(), static_cast<std::size_t>(model.config.horizons),
                               static_cast<std::size_t>(model.config.channels)});
}

} // namespace stssl::graph
