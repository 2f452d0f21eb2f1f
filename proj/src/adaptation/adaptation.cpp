// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/adaptation/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stssl::adapt {

void validate(const AdaptConfig& c) {
    if (c.t_min < 1 || c.t_max < 1 || c.t_min > c.t_max) {
        throw ContractError("AdaptConfig: need 1 <= t_min <= t_max");
    }
    if (!(c.sigma_spatial > 0.0)) throw ContractError("AdaptConfig: sigma_spatial must be positive");
    if (!(c.gamma_adapt >= 0.0)) throw ContractError("AdaptConfig: gamma_adapt must be nonnegative");
}

TemporalWeights temporal_weights(int horizon, const AdaptConfig& c) {
    if (horizon < 1 || horizon > c.t_max) {
        throw ContractError("temporal_weights: horizon " + std::to_string(horizon) + " outside [1, " +
                            std::to_string(c.t_max) + "]");
    }
    const double t = horizon;
    const double raw_short = 1.0 - (t - c.t_min) / static_cast<double>(c.t_min);
    const double raw_long = t / static_cast<double>(c.t_max);
    return TemporalWeights{std::clamp(raw_short, 0.0, 1.0), std::clamp(raw_long, 0.0, 1.0)};
}

double spatial_weight(std::pair<double, double> r_i, std::pair<double, double> r_0, double sigma_spatial) {
    if (!(sigma_spatial > 0.0)) throw ContractError("spatial_weight: sigma_spatial must be positive");
    const double dx = r_i.first - r_0.first;
    const double dy = r_i.second - r_0.second;
    return std::exp(-(dx * dx + dy * dy) / (sigma_spatial * sigma_spatial));
}

std::size_t target_region(const std::vector<graph::Region>& regions, const AdaptConfig& c) {
    if (regions.empty()) throw ContractError("target_region: no regions");
    if (c.target_region >= 0) {
        if (static_cast<std::size_t>(c.target_region) >= regions.size()) {
            throw ContractError("target_region: region " + std::to_string(c.target_region) + " does not exist");
        }
        return static_cast<std::size_t>(c.target_region);
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& r : regions) {
        cx += r.x_km;
        cy += r.y_km;
    }
    cx /= static_cast<double>(regions.size());
    cy /= static_cast<double>(regions.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const double d = graph::distance({regions[i].x_km, regions[i].y_km}, {cx, cy});
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<double> spatial_weights(const std::vector<graph::Region>& regions, const AdaptConfig& c) {
    const auto coords = graph::normalized_coordinates(regions);
    const auto origin = coords[target_region(regions, c)];
    std::vector<double> w;
    w.reserve(coords.size());
    for (const auto& r : coords) w.push_back(spatial_weight(r, origin, c.sigma_spatial));
    return w;
}

double combined_weight(int horizon, std::size_t region, const AdaptConfig& c, std::span<const double> spatial) {
    if (region >= spatial.size()) throw ContractError("combined_weight: region index out of range");
    const auto w = temporal_weights(horizon, c);
    return w.short_term * spatial[region] + w.long_term * spatial[region];
}

std::pair<double, double> split_horizon_losses(std::span<const double> per_horizon, const AdaptConfig& c) {
    const auto split = static_cast<std::size_t>(std::max(c.h_split, 0));
    if (split == 0 || split >= per_horizon.size()) {
        throw ContractError("adaptation_loss: h_split " + std::to_string(c.h_split) + " leaves an empty partition of " +
                            std::to_string(per_horizon.size()) + " horizons");
    }
    const double s = std::accumulate(per_horizon.begin(), per_horizon.begin() + static_cast<std::ptrdiff_t>(split), 0.0);
    const double l = std::accumulate(per_horizon.begin() + static_cast<std::ptrdiff_t>(split), per_horizon.end(), 0.0);
    return {s / static_cast<double>(split), l / static_cast<double>(per_horizon.size() - split)};
}

double adaptation_loss(std::span<const double> per_horizon, std::span<const double> per_region,
                       std::span<const double> spatial, const AdaptConfig& c) {
    const auto [short_loss, long_loss] = split_horizon_losses(per_horizon, c);
    std::vector<int> horizons(per_horizon.size());
    std::iota(horizons.begin(), horizons.end(), 1);
    return adaptation_loss<double>(horizons, short_loss, long_loss, per_region, spatial, c);
}

} // namespace stssl::adapt
