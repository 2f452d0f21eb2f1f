// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "stssl/datasets/series.hpp"

namespace stssl::train {

/// Mean absolute error over entries where mask is true. Throws ContractError
/// when no entry is valid.
double mae(std::span<const double> pred, std::span<const double> actual, const std::vector<bool>& mask);
/// Root mean squared error over entries where mask is true.
double rmse(std::span<const double> pred, std::span<const double> actual, const std::vector<bool>& mask);

inline constexpr std::size_t kHorizonCount = 7;

/// "24h", "48h", ... for horizon index 0..6.
std::string horizon_label(std::size_t h);

struct MetricCell {
    double mae = 0.0;
    double rmse = 0.0;
};

/// cells[h][v]: horizon h+1 days, physical variable v.
using MetricGrid = std::array<std::array<MetricCell, data::kVariables>, kHorizonCount>;

struct MetricRow {
    std::string label;
    MetricGrid cells{};
};

/// Rows of per-horizon, per-variable MAE/RMSE. add_row() rejects negative
/// cells and cells whose RMSE falls below MAE.
class MetricTable {
public:
    void add_row(MetricRow row);
    const std::vector<MetricRow>& rows() const noexcept { return rows_; }
    const MetricRow& row(const std::string& label) const;

    std::string to_json() const;
    /// label,variable,horizon,mae,rmse
    std::string to_csv() const;
    /// Fixed-width "MAE/RMSE" table for one variable, one row per label.
    std::string to_text(data::Variable v) const;

private:
    std::vector<MetricRow> rows_;
};

/// Smallest absolute angular difference in degrees, in [0, 180].
double angular_error(double a_deg, double b_deg);

} // namespace stssl::train
