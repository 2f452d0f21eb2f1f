// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "stssl/numerics/tape.hpp"

namespace stssl::graph {

/// A forecast region; coordinates are projected kilometres (east, north).
struct Region {
    int id = 0;
    double x_km = 0.0;
    double y_km = 0.0;

    friend bool operator==(const Region&, const Region&) = default;
};

/// Throws ContractError unless ids are exactly 0..n-1 in order.
void validate_regions(const std::vector<Region>& regions);

/// Coordinates divided by the largest pairwise distance, so every distance
/// between regions lies in [0, 1]. A single region maps to the origin.
std::vector<std::pair<double, double>> normalized_coordinates(const std::vector<Region>& regions);

double distance(std::pair<double, double> a, std::pair<double, double> b);

/// Edge weights from distance decay and feature correlation:
///   A_ij = exp(−d_ij / sigma_spatial) · max(corr_ij, 0) / gamma_corr,  A_ii = 1.
/// feature_history is T×n×d; the correlation of two regions is the Pearson
/// correlation of their histories flattened over time and features. Regions
/// with a constant history get zero correlation and a message in `warnings`.
num::Tensor build_adjacency(const std::vector<Region>& regions, const num::Tensor& feature_history,
                            double sigma_spatial, double gamma_corr,
                            std::vector<std::string>* warnings = nullptr);

struct RegionGraph {
    std::vector<Region> regions;
    num::Tensor adjacency;            // n×n
    double tau_edge = 0.05;
    std::vector<bool> neighbor_mask;  // n×n, row i marks N(i)

    std::size_t size() const noexcept { return regions.size(); }
    bool is_neighbor(std::size_t i, std::size_t j) const { return neighbor_mask[i * size() + j]; }
};

/// N(i) = { j : A_ij > tau_edge } ∪ { i }.
RegionGraph make_graph(std::vector<Region> regions, num::Tensor adjacency, double tau_edge);

/// Same graph with region k of the result equal to region perm[k] of g.
/// Region ids are renumbered 0..n-1.
RegionGraph permute_graph(const RegionGraph& g, const std::vector<std::size_t>& perm);

/// α_ij = softmax over j ∈ N(i) of e_iᵀe_j, zero outside N(i).
num::Var compute_attention(num::Var embeddings, const RegionGraph& graph);
num::Tensor compute_attention(const num::Tensor& embeddings, const RegionGraph& graph);

/// h'_i = tanh(h_i·W + Σ_{j∈N(i)} α_ij·A_ij·h_j). W must be square.
num::Var message_passing_layer(num::Var h, const RegionGraph& graph, num::Var alpha, num::Var weight);
num::Tensor message_passing_layer(const num::Tensor& h, const RegionGraph& graph, const num::Tensor& alpha,
                                  const num::Parameter& weight);

} // namespace stssl::graph
