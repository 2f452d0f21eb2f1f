// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "stssl/train/training.hpp"

namespace stssl::train {

struct AblationOutcome {
    AblationVariant variant;
    TrainResult result;
    MetricRow metrics;
};

struct AblationReport {
    MetricTable table;  // one row per variant, labelled by its tag
    std::vector<AblationOutcome> outcomes;
};

/// Called after each variant finishes, in ladder order.
using AblationProgress = std::function<void(const AblationOutcome&)>;

/// Trains every rung of the ladder (or the listed tags) on the same split and
/// seed and evaluates each on the test windows.
AblationReport run_ablation(const data::DatasetSplit& split, const TrainConfig& config,
                            const std::vector<char>& tags = {'a', 'b', 'c', 'd', 'e', 'f', 'g'},
                            const AblationProgress& progress = {});

} // namespace stssl::train
