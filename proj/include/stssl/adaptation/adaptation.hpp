// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "stssl/error.hpp"
#include "stssl/graph/region_graph.hpp"

namespace stssl::adapt {

struct AdaptConfig {
    int t_min = 1;                // days
    int t_max = 7;                // days
    double sigma_spatial = 0.5;   // normalized coordinate distance
    double gamma_adapt = 0.1;
    int h_split = 3;              // horizons 1..h_split are "short"
    int target_region = -1;       // r_0; negative picks the region nearest the centroid
};

void validate(const AdaptConfig& c);

struct TemporalWeights {
    double short_term = 0.0;
    double long_term = 0.0;
};

/// w_short = 1 − (t − T_min)/T_min and w_long = t/T_max, each clamped to [0, 1].
/// t is the forecast horizon in days, 1 ≤ t ≤ T_max.
TemporalWeights temporal_weights(int horizon, const AdaptConfig& c);

/// exp(−‖r_i − r_0‖² / σ²)
double spatial_weight(std::pair<double, double> r_i, std::pair<double, double> r_0, double sigma_spatial);

/// Region index used as r_0 for this region set.
std::size_t target_region(const std::vector<graph::Region>& regions, const AdaptConfig& c);

/// Spatial weight of every region in normalized coordinates.
std::vector<double> spatial_weights(const std::vector<graph::Region>& regions, const AdaptConfig& c);

/// w_short(t)·w_i + w_long(t)·w_i: both spatial factors refer to the same
/// region.
double combined_weight(int horizon, std::size_t region, const AdaptConfig& c, std::span<const double> spatial);

/// Mean per-horizon loss over 1..h_split and over h_split+1..H. Throws
/// ContractError if either side is empty. per_horizon[h-1] is horizon h.
std::pair<double, double> split_horizon_losses(std::span<const double> per_horizon, const AdaptConfig& c);

/// [Σ_{t∈horizons} (w_short(t)·L_short + w_long(t)·L_long)] / |horizons|
///   + γ_adapt · Σ_i w_i · L_spatial_i
/// Works on doubles and on tape vars.
template <typename T>
T adaptation_loss(std::span<const int> horizons, T short_loss, T long_loss, std::span<const T> region_losses,
                  std::span<const double> spatial, const AdaptConfig& c) {
    if (horizons.empty()) throw ContractError("adaptation_loss: no horizon terms");
    if (region_losses.size() != spatial.size()) {
        throw ContractError("adaptation_loss: " + std::to_string(region_losses.size()) + " region losses for " +
                            std::to_string(spatial.size()) + " spatial weights");
    }
    double short_coef = 0.0;
    double long_coef = 0.0;
    for (int t : horizons) {
        const auto w = temporal_weights(t, c);
        short_coef += w.short_term;
        long_coef += w.long_term;
    }
    const double inv = 1.0 / static_cast<double>(horizons.size());
    T total = (short_coef * inv) * short_loss + (long_coef * inv) * long_loss;
    for (std::size_t i = 0; i < region_losses.size(); ++i) {
        total = total + (c.gamma_adapt * spatial[i]) * region_losses[i];
    }
    return total;
}

/// Horizons 1..H from per-horizon losses, split at h_split.
double adaptation_loss(std::span<const double> per_horizon, std::span<const double> per_region,
                       std::span<const double> spatial, const AdaptConfig& c);

} // namespace stssl::adapt
