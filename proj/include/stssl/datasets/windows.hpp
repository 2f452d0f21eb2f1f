// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "stssl/datasets/series.hpp"

namespace stssl::data {

/// One example of the 7-days-in, 7-days-out protocol on encoded data.
struct SampleWindow {
    std::size_t anchor = 0;        // step index of the last input day
    Day anchor_day{};
    num::Tensor input;             // 7 × n × 7
    num::Tensor target;            // 7 × n × 7
    std::vector<bool> target_valid;
};

/// Stride-1 windows, T − 13 of them; an empty list and a warning when T < 14.
std::vector<SampleWindow> window_samples(const EncodedSeries& s, std::vector<std::string>* warnings = nullptr);

struct SplitFractions {
    double train = 0.70;
    double validation = 0.15;
};

/// Chronological train/validation/test partition of the windows of one
/// series. Statistics come from the steps covered by training windows only.
struct DatasetSplit {
    WeatherSeries raw;
    NormStats stats;
    EncodedSeries encoded;
    std::size_t train_end_step = 0;  // exclusive; steps used for statistics and the graph
    std::vector<SampleWindow> train;
    std::vector<SampleWindow> validation;
    std::vector<SampleWindow> test;

    /// Encoded history of the training span, train_end_step × n × 7.
    num::Tensor train_history() const;
};

/// When `stats` is given it replaces the statistics computed from the
/// training span, so a stored model sees data encoded exactly as in training.
DatasetSplit make_split(const WeatherSeries& raw, SplitFractions fractions = {}, const NormStats* stats = nullptr);

} // namespace stssl::data
