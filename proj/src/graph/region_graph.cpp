// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/graph/region_graph.hpp"

#include <algorithm>
#include <cmath>

#include "stssl/error.hpp"

namespace stssl::graph {

using num::Shape;
using num::Tensor;
using num::Tape;
using num::Var;

void validate_regions(const std::vector<Region>& regions) {
    if (regions.empty()) throw ContractError("no regions");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].id != static_cast<int>(i)) {
            throw ContractError("region ids must be contiguous from 0; position " + std::to_string(i) + " has id " +
                                std::to_string(regions[i].id));
        }
    }
}

double distance(std::pair<double, double> a, std::pair<double, double> b) {
    const double dx = a.first - b.first;
    const double dy = a.second - b.second;
    return std::sqrt(dx * dx + dy * dy);
}

std::vector<std::pair<double, double>> normalized_coordinates(const std::vector<Region>& regions) {
    double extent = 0.0;
    for (std::size_t i = 0; i < regions.size(); ++i)
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            extent = std::max(extent, distance({regions[i].x_km, regions[i].y_km}, {regions[j].x_km, regions[j].y_km}));
        }
    std::vector<std::pair<double, double>> out;
    out.reserve(regions.size());
    for (const auto& r : regions) {
        if (extent > 0.0)
            out.emplace_back(r.x_km / extent, r.y_km / extent);
        else
            out.emplace_back(0.0, 0.0);
    }
    return out;
}

Tensor build_adjacency(const std::vector<Region>& regions, const Tensor& feature_history, double sigma_spatial,
                       double gamma_corr, std::vector<std::string>* warnings) {
    const std::size_t n = regions.size();
    if (feature_history.rank() != 3 || feature_history.dim(1) != n) {
        throw ShapeError("build_adjacency: feature history " + num::to_string(feature_history.shape()) + " for " +
                         std::to_string(n) + " regions");
    }
    if (feature_history.dim(0) < 2) throw ContractError("build_adjacency: at least 2 time steps required");
    if (!(sigma_spatial > 0.0)) throw ContractError("build_adjacency: sigma_spatial must be positive");
    if (!(gamma_corr > 0.0)) throw ContractError("build_adjacency: gamma_corr must be positive");

    const std::size_t steps = feature_history.dim(0), d = feature_history.dim(2);
    const std::size_t len = steps * d;

    // Centred, flattened history per region.
    std::vector<std::vector<double>> centred(n, std::vector<double>(len));
    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& f = centred[i];
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t k = 0; k < d; ++k) f[t * d + k] = feature_history.at(t, i, k);
        double mean = 0.0;
        for (double v : f) mean += v;
        mean /= static_cast<double>(len);
        for (double& v : f) v -= mean;
        for (double v : f) energy[i] += v * v;
        if (!(energy[i] > 0.0) && warnings) {
            warnings->push_back("region " + std::to_string(i) +
                                " has a constant feature history; its correlations are set to 0");
        }
    }

    const auto coords = normalized_coordinates(regions);
    Tensor a(Shape{n, n}, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double corr = 0.0;
            if (energy[i] > 0.0 && energy[j] > 0.0) {
                double cross = 0.0;
                for (std::size_t k = 0; k < len; ++k) cross += centred[i][k] * centred[j][k];
                corr = std::clamp(cross / std::sqrt(energy[i] * energy[j]), -1.0, 1.0);
            }
            const double decay = std::exp(-distance(coords[i], coords[j]) / sigma_spatial);
            const double w = decay * std::max(corr, 0.0) / gamma_corr;
            a.at(i, j) = w;
            a.at(j, i) = w;
        }
    }
    return a;
}

RegionGraph make_graph(std::vector<Region> regions, Tensor adjacency, double tau_edge) {
    const std::size_t n = regions.size();
    if (adjacency.rank() != 2 || adjacency.dim(0) != n || adjacency.dim(1) != n) {
        throw ShapeError("make_graph: adjacency " + num::to_string(adjacency.shape()) + " for " + std::to_string(n) +
                         " regions");
    }
    if (!(tau_edge >= 0.0 && tau_edge < 1.0)) throw ContractError("make_graph: tau_edge must lie in [0, 1)");
    RegionGraph g;
    g.regions = std::move(regions);
    g.adjacency = std::move(adjacency);
    g.tau_edge = tau_edge;
    g.neighbor_mask.assign(n * n, false);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g.neighbor_mask[i * n + j] = (i == j) || g.adjacency.at(i, j) > tau_edge;
    return g;
}

RegionGraph permute_graph(const RegionGraph& g, const std::vector<std::size_t>& perm) {
    const std::size_t n = g.size();
    if (perm.size() != n) throw ContractError("permute_graph: permutation size mismatch");
    std::vector<Region> regions(n);
    Tensor a(Shape{n, n});
    for (std::size_t k = 0; k < n; ++k) {
        regions[k] = g.regions[perm[k]];
        regions[k].id = static_cast<int>(k);
        for (std::size_t l = 0; l < n; ++l) a.at(k, l) = g.adjacency.at(perm[k], perm[l]);
    }
    return make_graph(std::move(regions), std::move(a), g.tau_edge);
}

Var compute_attention(Var embeddings, const RegionGraph& graph) {
    if (embeddings.value().rank() != 2 || embeddings.value().dim(0) != graph.size()) {
        throw ShapeError("compute_attention: embeddings " + num::to_string(embeddings.shape()) + " for " +
                         std::to_string(graph.size()) + " regions");
    }
    return num::masked_softmax_rows(num::gram(embeddings), graph.neighbor_mask);
}

Tensor compute_attention(const Tensor& embeddings, const RegionGraph& graph) {
    num::Tape tape(false);
    return compute_attention(tape.constant(embeddings), graph).value();
}

Var message_passing_layer(Var h, const RegionGraph& graph, Var alpha, Var weight) {
    const Tensor& hv = h.value();
    const std::size_t n = graph.size();
    if (hv.rank() != 2 || hv.dim(0) != n) {
        throw ShapeError("message_passing_layer: features " + num::to_string(hv.shape()) + " for " +
                         std::to_string(n) + " regions");
    }
    if (alpha.value().shape() != Shape{n, n}) {
        throw ShapeError("message_passing_layer: attention " + num::to_string(alpha.shape()) + " for " +
                         std::to_string(n) + " regions");
    }
    const Tensor& wv = weight.value();
    if (wv.rank() != 2 || wv.dim(0) != hv.dim(1) || wv.dim(1) != hv.dim(1)) {
        throw ShapeError("message_passing_layer: weight " + num::to_string(wv.shape()) + " for features " +
                         num::to_string(hv.shape()));
    }
    Tape& tape = *h.tape;
    Var edge = num::mul(alpha, tape.constant(graph.adjacency));
    Var messages = num::aggregate_neighbors(edge, h);
    return num::tanh(num::add(num::matmul(h, weight), messages));
}

Tensor message_passing_layer(const Tensor& h, const RegionGraph& graph, const Tensor& alpha,
                             const num::Parameter& weight) {
    num::Tape tape(false);
    return message_passing_layer(tape.constant(h), graph, tape.constant(alpha), tape.frozen(weight)).value();
}

} // namespace stssl::graph
