// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/ssl/losses.hpp"

#include <cstdlib>

#include "stssl/error.hpp"

namespace stssl::ssl {

using num::Shape;
using num::Tensor;
using num::Var;

void validate(const LossWeights& w) {
    if (!(w.alpha >= 0.0) || !(w.beta >= 0.0)) throw ContractError("LossWeights: alpha and beta must be nonnegative");
    if (w.delta_t < 1) throw ContractError("LossWeights: delta_t must be at least 1");
}

LossReport total_loss(double prediction, double contrastive, double consistency, const LossWeights& w) {
    return LossReport{prediction, contrastive, consistency, weighted_total(prediction, contrastive, consistency, w)};
}

std::vector<TargetPair> generate_targets(const Tensor& series, std::vector<std::string>* warnings) {
    if (series.rank() != 3) throw ShapeError("generate_targets: T×n×V series expected, got " + num::to_string(series.shape()));
    const std::size_t steps = series.dim(0);
    std::vector<TargetPair> out;
    if (steps < kInputSteps + kHorizons) {
        if (warnings) {
            warnings->push_back("series has " + std::to_string(steps) + " steps; at least " +
                                std::to_string(kInputSteps + kHorizons) + " are needed for one sample");
        }
        return out;
    }
    const std::size_t frame = series.dim(1) * series.dim(2);
    const auto copy_span = [&](std::size_t first) {
        const auto begin = series.data().begin() + static_cast<std::ptrdiff_t>(first * frame);
        return Tensor(Shape{kInputSteps, series.dim(1), series.dim(2)},
                      std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(kInputSteps * frame)));
    };
    for (std::size_t anchor = kInputSteps - 1; anchor + kHorizons < steps; ++anchor) {
        out.push_back(TargetPair{anchor, copy_span(anchor + 1 - kInputSteps), copy_span(anchor + 1)});
    }
    return out;
}

double prediction_loss(const Tensor& pred, const Tensor& target, const std::vector<bool>& valid) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("prediction_loss: " + num::to_string(pred.shape()) + " vs " + num::to_string(target.shape()));
    }
    num::Tape tape(false);
    return num::masked_mse(tape.constant(pred), target, valid).item();
}

PairList similarity_pairs(const std::vector<long>& times, const graph::RegionGraph& graph, int delta_t) {
    const std::size_t n = graph.size();
    const std::size_t total = times.size() * n;
    PairList pairs;
    for (std::size_t p = 0; p < total; ++p) {
        for (std::size_t q = p + 1; q < total; ++q) {
            const std::size_t bp = p / n, ip = p % n, bq = q / n, iq = q % n;
            if (std::labs(times[bp] - times[bq]) > delta_t) continue;
            if (ip != iq && !(graph.adjacency.at(ip, iq) > graph.tau_edge)) continue;
            pairs.emplace_back(p, q);
        }
    }
    return pairs;
}

PairList consistency_pairs(const std::vector<long>& times, std::size_t regions, int delta_t) {
    PairList pairs;
    for (std::size_t b = 0; b < times.size(); ++b)
        for (std::size_t b2 = b + 1; b2 < times.size(); ++b2) {
            if (std::labs(times[b] - times[b2]) >= delta_t) continue;
            for (std::size_t i = 0; i < regions; ++i) pairs.emplace_back(b * regions + i, b2 * regions + i);
        }
    return pairs;
}

namespace {

Tensor as_rows(const Tensor& features) {
    if (features.rank() != 3) {
        throw ShapeError("features must be B×n×d, got " + num::to_string(features.shape()));
    }
    return features.reshaped(Shape{features.dim(0) * features.dim(1), features.dim(2)});
}

} // namespace

double contrastive_loss(const Tensor& features, const PairList& pairs) {
    num::Tape tape(false);
    return contrastive_loss(tape.constant(as_rows(features)), pairs).item();
}

double consistency_loss(const Tensor& features, const std::vector<long>& times, int delta_t) {
    if (features.rank() != 3 || features.dim(0) != times.size()) {
        throw ShapeError("consistency_loss: features " + num::to_string(features.shape()) + " with " +
                         std::to_string(times.size()) + " time indices");
    }
    num::Tape tape(false);
    return consistency_loss(tape.constant(as_rows(features)), times, features.dim(1), delta_t).item();
}

Var contrastive_loss(Var rows, const PairList& pairs) { return num::mean_pair_distance(rows, pairs); }

Var consistency_loss(Var rows, const std::vector<long>& times, std::size_t regions, int delta_t) {
    return num::mean_pair_distance(rows, consistency_pairs(times, regions, delta_t));
}

} // namespace stssl::ssl
