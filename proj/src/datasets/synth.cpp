// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/datasets/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "stssl/error.hpp"

namespace stssl::data {

using num::Shape;
using num::Tensor;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kYear = 365.25;
constexpr double kAnomalyPersistence = 0.6;
constexpr double kDriveGain = 2.0;
constexpr double kKernelScale = 0.35;  // normalized distance

struct Weather {
    std::vector<double> disturbance;  // days × n, iid unit normal
    std::vector<double> anomaly;      // days × n
};

/// Each region carries an independent daily disturbance (visible in its
/// own pressure and cloud cover). Tomorrow's anomaly at a region is driven
/// by a distance-weighted mean of its neighbours' disturbances today, so a
/// region's own history cannot anticipate it but its neighbourhood can.
Weather disturbance_driven(const std::vector<graph::Region>& regions, std::size_t days, std::mt19937_64& rng) {
    const std::size_t n = regions.size();
    const auto coords = graph::normalized_coordinates(regions);
    std::vector<double> kernel(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            kernel[i * n + j] = std::exp(-graph::distance(coords[i], coords[j]) / kKernelScale);
            row += kernel[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) kernel[i * n + j] /= row;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Weather w;
    w.disturbance.resize(days * n);
    w.anomaly.assign(days * n, 0.0);
    for (auto& v : w.disturbance) v = normal(rng);
    for (std::size_t t = 1; t < days; ++t)
        for (std::size_t i = 0; i < n; ++i) {
            double drive = 0.0;
            for (std::size_t j = 0; j < n; ++j) drive += kernel[i * n + j] * w.disturbance[(t - 1) * n + j];
            w.anomaly[t * n + i] = kAnomalyPersistence * w.anomaly[(t - 1) * n + i] + kDriveGain * drive;
        }
    return w;
}

} // namespace

WeatherSeries synthesize(const SynthSpec& spec) {
    if (spec.regions < kMinSynthRegions) throw ContractError("synthesize: at least 2 regions required");
    if (spec.days < kMinSynthDays) throw ContractError("synthesize: at least 28 days required");
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) {
        throw ContractError("synthesize: missing_rate must lie in [0, 1)");
    }
    const auto n = static_cast<std::size_t>(spec.regions);
    const auto days = static_cast<std::size_t>(spec.days);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const std::size_t rows = (n + cols - 1) / cols;

    WeatherSeries s;
    s.start = spec.start;
    for (std::size_t k = 0; k < n; ++k) {
        s.regions.push_back({static_cast<int>(k), static_cast<double>(k % cols) * spec.spacing_km,
                             static_cast<double>(k / cols) * spec.spacing_km});
    }

    std::mt19937_64 field_rng(spec.seed);
    const auto weather = disturbance_driven(s.regions, days, field_rng);
    std::mt19937_64 noise_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::mt19937_64 mask_rng(spec.seed ^ 0xc2b2ae3d27d4eb4fULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::chrono::year_month_day ymd{spec.start};
    const Day jan1{ymd.year() / std::chrono::January / 1};
    const auto day_of_year0 = static_cast<double>((spec.start - jan1).count());
    const double extent = spec.spacing_km * static_cast<double>(std::max(cols, rows));

    s.values = Tensor(Shape{days, n, kVariables}, 0.0);
    s.valid.assign(s.values.size(), true);
    for (std::size_t t = 0; t < days; ++t) {
        const double doy = day_of_year0 + static_cast<double>(t);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = weather.anomaly[t * n + i];
            const double d = weather.disturbance[t * n + i];
            const double phase = 0.35 * (s.regions[i].x_km + 0.5 * s.regions[i].y_km) / extent;
            const double annual = std::cos(kTwoPi * (doy - 200.0) / kYear + phase);
            const double weekly = std::sin(kTwoPi * static_cast<double>(t) / 7.0 + 2.0 * phase);

            const double temperature = 12.0 - 0.01 * s.regions[i].y_km + 10.0 * annual + weekly + 4.0 * a +
                                       0.4 * normal(noise_rng);
            const double pressure = 1013.0 - 4.0 * annual - 2.0 * a + 5.0 * d + 0.5 * normal(noise_rng);
            const double wind_speed = std::max(0.0, 5.0 + weekly - 1.5 * a + 0.4 * normal(noise_rng));
            double angle =
                std::fmod(200.0 + 2.5 * static_cast<double>(t) + 40.0 * a + 8.0 * normal(noise_rng), 360.0);
            if (angle < 0.0) angle += 360.0;
            if (angle >= 360.0) angle -= 360.0;
            const double cloud =
                std::clamp(50.0 + 10.0 * weekly + 10.0 * a - 15.0 * d + 3.0 * normal(noise_rng), 0.0, 100.0);
            const double spread = std::max(0.5, 5.0 - 0.03 * cloud - a + 0.5 * normal(noise_rng));

            double* out = &s.values.at(t, i, 0);
            out[index(Variable::Temperature)] = temperature;
            out[index(Variable::WindSpeed)] = wind_speed;
            out[index(Variable::WindAngle)] = angle;
            out[index(Variable::Pressure)] = pressure;
            out[index(Variable::CloudCover)] = cloud;
            out[index(Variable::DewPoint)] = temperature - spread;
        }
    }
    if (spec.missing_rate > 0.0) {
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            if (unit(mask_rng) < spec.missing_rate) {
                s.valid[k] = false;
                s.values[k] = 0.0;
            }
        }
    }
    return s;
}

} // namespace stssl::data
