// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "stssl/graph/region_graph.hpp"
#include "stssl/numerics/tape.hpp"

namespace stssl::graph {

struct GnnConfig {
    int layers = 2;
    int hidden = 32;
    int attention_width = 16;
    double gamma_corr = 1.0;
    double tau_edge = 0.05;
    int horizons = 7;
    /// Six physical variables with wind angle carried as a sin/cos pair.
    int channels = 7;
    int input_steps = 7;
    bool enable_gnn = true;
};

void validate(const GnnConfig& config);

using ParameterGroup = std::vector<num::Parameter>;

/// Gated recurrent encoder shared by all regions, optional message-passing
/// stack, and a per-region readout head shared across regions.
///
/// encoder: W_z W_r W_h [C×d], U_z U_r U_h [d×d], b_z b_r b_h [1×d]
/// gnn:     per layer, self weight [d×d] and attention projection [d×d_e]
/// readout: weight [d×H·C], bias [1×H·C]
struct Model {
    GnnConfig config;
    RegionGraph graph;
    ParameterGroup encoder;
    ParameterGroup gnn;
    ParameterGroup readout;

    std::vector<num::Parameter*> parameters();
    std::vector<const num::Parameter*> parameters() const;
    std::vector<num::Parameter*> encoder_and_gnn();
};

/// Fresh model; weights uniform in ±sqrt(1/fan_in), biases zero.
Model init_model(const GnnConfig& config, RegionGraph graph, std::uint64_t seed);

/// Tape handles for every parameter, in group order.
struct Bound {
    std::vector<num::Var> encoder;
    std::vector<num::Var> gnn;
    std::vector<num::Var> readout;
};

enum class Train : unsigned { None = 0, Encoder = 1, Gnn = 2, Readout = 4, All = 7 };
constexpr Train operator|(Train a, Train b) { return Train(unsigned(a) | unsigned(b)); }
constexpr bool has(Train set, Train bit) { return (unsigned(set) & unsigned(bit)) != 0; }

/// Groups in `trainable` receive gradients; the rest enter the tape frozen.
Bound bind(num::Tape& tape, Model& model, Train trainable = Train::All);
Bound bind_frozen(num::Tape& tape, const Model& model);

struct Forward {
    num::Var forecast;   // n × (H·C), horizon-major
    num::Var embedding;  // n × d, the final node features
};

/// input is input_steps × n × C.
Forward forward(num::Tape& tape, const Bound& bound, const Model& model, const num::Tensor& input);

/// Final hidden state of the recurrent encoder; n × d.
num::Var encode(num::Tape& tape, const Bound& bound, const Model& model, const num::Tensor& input);

num::Var readout(num::Var h_final, const Bound& bound);
/// n × H × C forecasts from final node features.
num::Tensor readout(const num::Tensor& h_final, const Model& model);

/// Inference forward pass; n × H × C.
num::Tensor gnn_forward(const Model& model, const num::Tensor& input);

} // namespace stssl::graph
