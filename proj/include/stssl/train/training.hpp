// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stssl/adaptation/adaptation.hpp"
#include "stssl/datasets/windows.hpp"
#include "stssl/graph/model.hpp"
#include "stssl/ssl/losses.hpp"
#include "stssl/train/metrics.hpp"

namespace stssl::train {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 50;
    double weight_decay = 1e-5;
    double alpha = 0.1;
    double beta = 0.01;
    int delta_t = 5;
    /// Shared by the adjacency decay and the spatial adaptation weight.
    double sigma_spatial = 0.5;
    int early_stop_patience = 10;
    int pretrain_epochs = 10;
    std::uint64_t seed = 7;
    int eval_threads = 1;

    graph::GnnConfig gnn;
    adapt::AdaptConfig adapt;

    ssl::LossWeights loss_weights() const { return {alpha, beta, delta_t}; }
    adapt::AdaptConfig adapt_config() const {
        auto a = adapt;
        a.sigma_spatial = sigma_spatial;
        return a;
    }
};

void validate(const TrainConfig& c);

/// Desk-scale setting for the synthetic benchmark: defaults except a step
/// size large enough for plain SGD to converge within the epoch budget,
/// correlation scaling that lets neighbour messages compete with the self
/// term, and a matching edge threshold.
TrainConfig benchmark_config();

/// One rung of the ablation ladder. Flags accumulate from (a) to (g).
struct AblationVariant {
    char tag = 'g';
    bool enable_gnn = false;
    bool enable_adaptation = false;
    bool enable_ssl_pretrain = false;
    bool enable_contrastive = false;
    bool enable_consistency = false;

    std::string name() const;
    int active_flags() const;
};

/// Throws ContractError for tags outside a–g.
AblationVariant variant(char tag);
std::vector<AblationVariant> ablation_ladder();

struct EpochRecord {
    std::string phase;  // "pretrain" or "train"
    int epoch = 0;
    ssl::LossReport loss;  // means over the epoch's batches
    double validation_mae = 0.0;
};

struct TrainingLog {
    char variant = 'g';
    /// Objective of the starting parameters over the training windows,
    /// before the first update of the main phase.
    ssl::LossReport initial_loss;
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;  // epoch number of the best "train" record; -1 if none ran
    double best_validation_mae = 0.0;
    bool stopped_early = false;

    std::vector<EpochRecord> phase(const std::string& name) const;
    std::string to_json() const;
};

/// Model plus everything needed to run it on new data.
struct TrainedModel {
    char variant = 'g';
    graph::Model model;
    data::NormStats stats;
};

struct TrainResult {
    TrainedModel trained;
    TrainingLog log;
};

/// Graph of a split built from its training history.
graph::RegionGraph build_graph(const data::DatasetSplit& split, const TrainConfig& config);

/// Freshly initialised model for the variant; no GNN parameters for (a).
graph::Model initial_model(const data::DatasetSplit& split, const AblationVariant& v, const TrainConfig& config);

/// Loss components of one batch, recorded on the tape.
struct BatchObjective {
    num::Var total;
    ssl::LossReport report;
};

struct ObjectiveTerms {
    bool adaptation = false;
    bool contrastive = false;
    bool consistency = false;
};

BatchObjective batch_objective(num::Tape& tape, const graph::Bound& bound, const graph::Model& model,
                               const std::vector<const data::SampleWindow*>& batch, const ObjectiveTerms& terms,
                               const TrainConfig& config);

/// Mean absolute error over all valid target entries in encoded units.
double validation_mae(const graph::Model& model, const std::vector<data::SampleWindow>& windows, int threads = 1);

/// Self-supervised warm start: encoder and GNN groups are trained for
/// pretrain_epochs on prediction + α·contrastive + β·consistency against
/// self-generated future-frame targets; the readout head stays fixed.
void ssl_pretrain(graph::Model& model, const data::DatasetSplit& split, const TrainConfig& config, TrainingLog& log);

/// Mini-batch SGD on the variant's objective with early stopping on
/// validation MAE. Returns the parameters of the best validation epoch.
/// Throws DivergenceError naming the epoch on a non-finite loss.
TrainResult train(const data::DatasetSplit& split, const AblationVariant& v, const TrainConfig& config);

/// Per-window forecasts in physical units, n × 7 × 6 each, in window order.
std::vector<num::Tensor> predict(const TrainedModel& m, const std::vector<data::SampleWindow>& windows,
                                 int threads = 1);

/// Observed physical values for horizon h (1-based) of a window: n × 6 and
/// its validity mask.
std::pair<num::Tensor, std::vector<bool>> observed(const data::WeatherSeries& raw, const data::SampleWindow& w,
                                                   std::size_t horizon);

/// Per-horizon, per-variable MAE/RMSE on denormalized forecasts. Wind angle
/// errors are angular distances.
MetricRow evaluate_row(const TrainedModel& m, const data::WeatherSeries& raw,
                       const std::vector<data::SampleWindow>& test, const std::string& label, int threads = 1);

/// Single-row table for the split's test windows. Throws ContractError when
/// the test split is empty.
MetricTable evaluate(const TrainedModel& m, const data::DatasetSplit& split, const std::string& label = "model",
                     int threads = 1);

} // namespace stssl::train
