// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "stssl/datasets/series.hpp"
#include "stssl/train/training.hpp"

namespace stssl::train {

inline constexpr int kModelFormatVersion = 1;

/// JSON container: format_version, variant, config, regions, adjacency,
/// normalization stats and the parameter groups with their shapes. The "gnn"
/// group is absent for models without message passing.
std::string model_to_json(const TrainedModel& m);

/// Throws IncompatibleError for an unknown format version or parameters that
/// do not match the stored configuration, SchemaError for malformed input.
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Throws IncompatibleError with a shape diagnostic when the series does not
/// cover the model's regions.
void check_compatible(const TrainedModel& m, const data::WeatherSeries& s);

} // namespace stssl::train
