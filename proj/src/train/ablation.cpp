// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/train/ablation.hpp"

namespace stssl::train {

AblationReport run_ablation(const data::DatasetSplit& split, const TrainConfig& config, const std::vector<char>& tags,
                            const AblationProgress& progress) {
    validate(config);
    AblationReport report;
    for (char tag : tags) {
        AblationOutcome outcome;
        outcome.variant = variant(tag);
        outcome.result = train(split, outcome.variant, config);
        outcome.metrics =
            evaluate_row(outcome.result.trained, split.raw, split.test, std::string(1, tag), config.eval_threads);
        report.table.add_row(outcome.metrics);
        if (progress) progress(outcome);
        report.outcomes.push_back(std::move(outcome));
    }
    return report;
}

} // namespace stssl::train
