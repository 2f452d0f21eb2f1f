// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "stssl/graph/region_graph.hpp"
#include "stssl/numerics/tensor.hpp"

namespace stssl::data {

enum class Variable : std::size_t { Temperature, WindSpeed, WindAngle, Pressure, CloudCover, DewPoint };

struct VariableSpec {
    std::string_view name;
    std::string_view units;
    bool circular;
};

inline constexpr std::size_t kVariables = 6;
/// Encoded width: wind angle becomes a (sin, cos) pair.
inline constexpr std::size_t kChannels = 7;

inline constexpr std::array<VariableSpec, kVariables> kVariableSpecs{{
    {"temperature", "degC", false},
    {"wind_speed", "m/s", false},
    {"wind_angle", "deg", true},
    {"pressure", "hPa", false},
    {"cloud_cover", "%", false},
    {"dew_point", "degC", false},
}};

constexpr std::size_t index(Variable v) { return static_cast<std::size_t>(v); }

/// First encoded channel of each physical variable.
constexpr std::array<std::size_t, kVariables> kChannelOf{0, 1, 2, 4, 5, 6};

/// Throws SchemaError for names outside the six known variables.
Variable variable_from_name(std::string_view name);

using Day = std::chrono::sys_days;

Day parse_date(std::string_view iso);  // YYYY-MM-DD
std::string format_date(Day d);

/// Daily multi-variable series in physical units. values is T×n×6; valid
/// marks observed entries (same layout). Values at invalid entries are 0.
struct WeatherSeries {
    std::vector<graph::Region> regions;
    Day start{};
    num::Tensor values;
    std::vector<bool> valid;

    std::size_t steps() const { return values.dim(0); }
    std::size_t region_count() const { return regions.size(); }
    Day day(std::size_t t) const { return start + std::chrono::days(static_cast<long>(t)); }
    std::size_t missing_count() const;
    bool is_valid(std::size_t t, std::size_t i, std::size_t v) const {
        return valid[(t * region_count() + i) * kVariables + v];
    }

    friend bool operator==(const WeatherSeries&, const WeatherSeries&) = default;
};

void validate(const WeatherSeries& s);

/// Normalized series, T×n×7: z-scores for the linear variables and the unit
/// circle encoding of wind angle. Invalid entries hold 0.
struct EncodedSeries {
    std::vector<graph::Region> regions;
    Day start{};
    num::Tensor values;
    std::vector<bool> valid;
};

std::pair<double, double> encode_wind_angle(double degrees);  // (sin, cos)
double decode_wind_angle(double sin_part, double cos_part);    // in [0, 360)

/// Per-variable mean and standard deviation; wind angle entries are unused.
struct NormStats {
    std::array<double, kVariables> mean{};
    std::array<double, kVariables> stddev{};

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline constexpr double kStdFloor = 1e-8;

/// Statistics over valid entries of steps [0, end_step), std floored at 1e-8.
NormStats compute_stats(const WeatherSeries& s, std::size_t end_step);

EncodedSeries normalize(const WeatherSeries& s, const NormStats& stats);
WeatherSeries denormalize(const EncodedSeries& e, const NormStats& stats);

/// Decode the last axis of a (…×7) encoded tensor to (…×6) physical values.
num::Tensor decode_channels(const num::Tensor& encoded, const NormStats& stats);

} // namespace stssl::data
