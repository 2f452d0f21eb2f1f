// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "stssl/graph/region_graph.hpp"
#include "stssl/numerics/tape.hpp"

namespace stssl::ssl {

struct LossWeights {
    double alpha = 0.1;   // contrastive
    double beta = 0.01;   // consistency
    int delta_t = 5;      // time steps
};

void validate(const LossWeights& w);

struct LossReport {
    double prediction = 0.0;
    double contrastive = 0.0;
    double consistency = 0.0;
    double total = 0.0;
};

/// prediction + alpha·contrastive + beta·consistency, in that order, for both
/// plain doubles and tape vars.
template <typename T>
T weighted_total(T prediction, T contrastive, T consistency, const LossWeights& w) {
    return prediction + w.alpha * contrastive + w.beta * consistency;
}

LossReport total_loss(double prediction, double contrastive, double consistency, const LossWeights& w);

/// One self-generated example: inputs are steps [anchor−6, anchor], targets
/// are steps [anchor+1, anchor+7] of the same series.
struct TargetPair {
    std::size_t anchor = 0;
    num::Tensor input;   // 7 × n × V
    num::Tensor target;  // 7 × n × V
};

inline constexpr std::size_t kInputSteps = 7;
inline constexpr std::size_t kHorizons = 7;

/// Every anchor with a full input and target span, stride 1: T − 13 pairs.
/// Fewer than 14 steps gives an empty result and a warning.
std::vector<TargetPair> generate_targets(const num::Tensor& series, std::vector<std::string>* warnings = nullptr);

/// Mean of squared differences over entries flagged valid.
double prediction_loss(const num::Tensor& pred, const num::Tensor& target, const std::vector<bool>& valid);

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

/// Pairs of batch rows (b·n + i) considered similar: distinct elements whose
/// times differ by at most delta_t and whose regions are equal or joined by
/// an edge (A_ij > tau_edge). Each unordered pair appears once.
PairList similarity_pairs(const std::vector<long>& times, const graph::RegionGraph& graph, int delta_t);

/// Same-region pairs of distinct elements with |t − t'| < delta_t.
PairList consistency_pairs(const std::vector<long>& times, std::size_t regions, int delta_t);

/// features is B × n × d; the mean squared distance over `pairs`, 0 if none.
double contrastive_loss(const num::Tensor& features, const PairList& pairs);
double consistency_loss(const num::Tensor& features, const std::vector<long>& times, int delta_t);

/// Taped versions over stacked rows [(B·n) × d].
num::Var contrastive_loss(num::Var rows, const PairList& pairs);
num::Var consistency_loss(num::Var rows, const std::vector<long>& times, std::size_t regions, int delta_t);

} // namespace stssl::ssl
