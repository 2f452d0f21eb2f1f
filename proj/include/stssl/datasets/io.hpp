// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "stssl/datasets/series.hpp"

namespace stssl::data {

inline constexpr std::string_view kRegionHeader = "# regions: id,x_km,y_km";
inline constexpr std::string_view kColumnHeader =
    "timestamp,region_id,temperature,wind_speed,wind_angle,pressure,cloud_cover,dew_point";

/// Grid CSV, or the JSON sidecar when the path ends in ".json". Rows may come
/// in any order; (day, region) pairs without a row are marked missing.
WeatherSeries ingest(const std::filesystem::path& path);
WeatherSeries parse_csv(const std::string& text);
WeatherSeries parse_json(const std::string& text);

std::string to_csv(const WeatherSeries& s);
std::string to_json(const WeatherSeries& s);
/// Chooses the format from the extension like ingest().
void write_series(const WeatherSeries& s, const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

} // namespace stssl::data
