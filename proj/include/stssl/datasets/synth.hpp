// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "stssl/datasets/series.hpp"

namespace stssl::data {

struct SynthSpec {
    std::uint64_t seed = 7;
    int regions = 9;
    int days = 400;
    double missing_rate = 0.0;
    double spacing_km = 100.0;
    Day start = parse_date("2019-01-01");
};

inline constexpr int kMinSynthRegions = 2;
inline constexpr int kMinSynthDays = 28;

/// Deterministic analog of a regional reanalysis grid. Regions sit on a
/// square-ish lattice. Each region draws an independent daily disturbance
/// that shows up in its own pressure and cloud cover. The next day's
/// anomaly, which moves temperature, wind and dew point, is a persistent
/// echo of the distance-weighted disturbance around the region, so part of
/// tomorrow is visible only through the neighbours. Annual and weekly
/// cycles shift phase with position. Wind angle drifts around the circle.
WeatherSeries synthesize(const SynthSpec& spec);

} // namespace stssl::data
