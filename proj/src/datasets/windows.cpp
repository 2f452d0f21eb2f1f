// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/datasets/windows.hpp"

#include <cmath>

#include "stssl/error.hpp"
#include "stssl/ssl/losses.hpp"

namespace stssl::data {

using num::Shape;
using num::Tensor;

std::vector<SampleWindow> window_samples(const EncodedSeries& s, std::vector<std::string>* warnings) {
    const auto pairs = ssl::generate_targets(s.values, warnings);
    const std::size_t frame = s.regions.size() * kChannels;
    std::vector<SampleWindow> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        SampleWindow w;
        w.anchor = p.anchor;
        w.anchor_day = s.start + std::chrono::days(static_cast<long>(p.anchor));
        w.input = p.input;
        w.target = p.target;
        const auto first = s.valid.begin() + static_cast<std::ptrdiff_t>((p.anchor + 1) * frame);
        w.target_valid.assign(first, first + static_cast<std::ptrdiff_t>(ssl::kHorizons * frame));
        out.push_back(std::move(w));
    }
    return out;
}

Tensor DatasetSplit::train_history() const {
    const std::size_t frame = encoded.regions.size() * kChannels;
    std::vector<double> data(encoded.values.data().begin(),
                             encoded.values.data().begin() + static_cast<std::ptrdiff_t>(train_end_step * frame));
    return Tensor(Shape{train_end_step, encoded.regions.size(), kChannels}, std::move(data));
}

DatasetSplit make_split(const WeatherSeries& raw, SplitFractions fractions, const NormStats* stats) {
    validate(raw);
    if (!(fractions.train > 0.0) || !(fractions.validation > 0.0) || fractions.train + fractions.validation >= 1.0) {
        throw ContractError("make_split: fractions must be positive and leave room for a test split");
    }
    const std::size_t span = ssl::kInputSteps + ssl::kHorizons;
    if (raw.steps() < span) {
        throw ContractError("make_split: series has " + std::to_string(raw.steps()) + " steps, fewer than " +
                            std::to_string(span));
    }
    const std::size_t windows = raw.steps() - span + 1;
    const auto n_train = static_cast<std::size_t>(std::floor(fractions.train * static_cast<double>(windows)));
    const auto n_val = static_cast<std::size_t>(std::floor(fractions.validation * static_cast<double>(windows)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= windows) {
        throw ContractError("make_split: " + std::to_string(windows) +
                            " windows are too few for non-empty train/validation/test splits");
    }

    DatasetSplit split;
    split.raw = raw;
    const std::size_t last_train_anchor = ssl::kInputSteps - 1 + n_train - 1;
    split.train_end_step = last_train_anchor + ssl::kHorizons + 1;
    split.stats = stats ? *stats : compute_stats(raw, split.train_end_step);
    split.encoded = normalize(raw, split.stats);

    auto all = window_samples(split.encoded);
    for (std::size_t k = 0; k < all.size(); ++k) {
        auto& dst = k < n_train ? split.train : (k < n_train + n_val ? split.validation : split.test);
        dst.push_back(std::move(all[k]));
    }
    return split;
}

} // namespace stssl::data
