// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/datasets/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "stssl/error.hpp"

namespace stssl::data {

using num::Shape;
using num::Tensor;

Variable variable_from_name(std::string_view name) {
    for (std::size_t v = 0; v < kVariables; ++v) {
        if (kVariableSpecs[v].name == name) return static_cast<Variable>(v);
    }
    throw SchemaError("unknown variable column '" + std::string(name) + "'");
}

Day parse_date(std::string_view iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    auto digits = [&](std::size_t pos, std::size_t len, auto& out) {
        if (pos + len > iso.size()) return false;
        auto [p, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
        return ec == std::errc{} && p == iso.data() + pos + len;
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !digits(0, 4, y) || !digits(5, 2, m) ||
        !digits(8, 2, d)) {
        throw SchemaError("invalid ISO-8601 date '" + std::string(iso) + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw SchemaError("invalid calendar date '" + std::string(iso) + "'");
    return Day{ymd};
}

std::string format_date(Day d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::size_t WeatherSeries::missing_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), false));
}

void validate(const WeatherSeries& s) {
    graph::validate_regions(s.regions);
    if (s.values.rank() != 3 || s.values.dim(1) != s.regions.size() || s.values.dim(2) != kVariables) {
        throw SchemaError("series values " + num::to_string(s.values.shape()) + " do not match " +
                          std::to_string(s.regions.size()) + " regions × 6 variables");
    }
    if (s.valid.size() != s.values.size()) throw SchemaError("series mask size does not match values");
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (s.valid[k] && !std::isfinite(s.values[k])) throw SchemaError("non-finite observed value");
    }
}

std::pair<double, double> encode_wind_angle(double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    return {std::sin(rad), std::cos(rad)};
}

double decode_wind_angle(double sin_part, double cos_part) {
    double deg = std::atan2(sin_part, cos_part) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

NormStats compute_stats(const WeatherSeries& s, std::size_t end_step) {
    end_step = std::min(end_step, s.steps());
    const std::size_t n = s.region_count();
    NormStats st;
    for (std::size_t v = 0; v < kVariables; ++v) {
        if (kVariableSpecs[v].circular) {
            st.mean[v] = 0.0;
            st.stddev[v] = 1.0;
            continue;
        }
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < end_step; ++t)
            for (std::size_t i = 0; i < n; ++i)
                if (s.is_valid(t, i, v)) {
                    sum += s.values.at(t, i, v);
                    ++count;
                }
        const double mean = count ? sum / static_cast<double>(count) : 0.0;
        double sq = 0.0;
        for (std::size_t t = 0; t < end_step; ++t)
            for (std::size_t i = 0; i < n; ++i)
                if (s.is_valid(t, i, v)) {
                    const double r = s.values.at(t, i, v) - mean;
                    sq += r * r;
                }
        st.mean[v] = mean;
        st.stddev[v] = std::max(count ? std::sqrt(sq / static_cast<double>(count)) : 0.0, kStdFloor);
    }
    return st;
}

EncodedSeries normalize(const WeatherSeries& s, const NormStats& stats) {
    const std::size_t steps = s.steps(), n = s.region_count();
    EncodedSeries e;
    e.regions = s.regions;
    e.start = s.start;
    e.values = Tensor(Shape{steps, n, kChannels}, 0.0);
    e.valid.assign(steps * n * kChannels, false);
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t base = (t * n + i) * kChannels;
            for (std::size_t v = 0; v < kVariables; ++v) {
                if (!s.is_valid(t, i, v)) continue;
                const double x = s.values.at(t, i, v);
                const std::size_t c = kChannelOf[v];
                if (kVariableSpecs[v].circular) {
                    const auto [sn, cs] = encode_wind_angle(x);
                    e.values[base + c] = sn;
                    e.values[base + c + 1] = cs;
                    e.valid[base + c] = e.valid[base + c + 1] = true;
                } else {
                    e.values[base + c] = (x - stats.mean[v]) / stats.stddev[v];
                    e.valid[base + c] = true;
                }
            }
        }
    return e;
}

namespace {

void decode_row(const double* enc, const NormStats& stats, double* out) {
    for (std::size_t v = 0; v < kVariables; ++v) {
        const std::size_t c = kChannelOf[v];
        out[v] = kVariableSpecs[v].circular ? decode_wind_angle(enc[c], enc[c + 1])
                                            : enc[c] * stats.stddev[v] + stats.mean[v];
    }
}

} // namespace

WeatherSeries denormalize(const EncodedSeries& e, const NormStats& stats) {
    const std::size_t steps = e.values.dim(0), n = e.regions.size();
    WeatherSeries s;
    s.regions = e.regions;
    s.start = e.start;
    s.values = Tensor(Shape{steps, n, kVariables}, 0.0);
    s.valid.assign(steps * n * kVariables, false);
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t in = (t * n + i) * kChannels;
            const std::size_t out = (t * n + i) * kVariables;
            double row[kVariables];
            decode_row(e.values.raw() + in, stats, row);
            for (std::size_t v = 0; v < kVariables; ++v) {
                const bool ok = e.valid[in + kChannelOf[v]];
                s.valid[out + v] = ok;
                s.values[out + v] = ok ? row[v] : 0.0;
            }
        }
    return s;
}

Tensor decode_channels(const Tensor& encoded, const NormStats& stats) {
    if (encoded.shape().back() != kChannels) {
        throw ShapeError("decode_channels: last axis must be 7, got " + num::to_string(encoded.shape()));
    }
    Shape shape = encoded.shape();
    shape.back() = kVariables;
    Tensor out(shape);
    const std::size_t rows = encoded.size() / kChannels;
    for (std::size_t r = 0; r < rows; ++r) decode_row(encoded.raw() + r * kChannels, stats, out.raw() + r * kVariables);
    return out;
}

} // namespace stssl::data
