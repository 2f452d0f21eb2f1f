// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "stssl/train/training.hpp"

namespace stssl::train {

inline constexpr const char* kErrorsHeader = "sample_index,anchor_date,region_id,variable,horizon_h,abs_error";

/// One row per (test sample, region, variable) at the given horizon (1..7),
/// in that nesting order. Entries without an observation are skipped. Wind
/// angle errors are angular distances in degrees.
std::string error_distribution_csv(const TrainedModel& m, const data::DatasetSplit& split, std::size_t horizon,
                                   int threads = 1);

/// region_id,x_km,y_km, observed_<var> x6, predicted_<var> x6 for one test
/// sample at the given horizon. Missing observations are empty cells.
std::string field_grid_csv(const TrainedModel& m, const data::DatasetSplit& split, std::size_t sample,
                           std::size_t horizon);

/// Writes text to path, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace stssl::train
