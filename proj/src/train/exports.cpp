// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/train/exports.hpp"

#include <cmath>
#include <fstream>

#include "stssl/datasets/io.hpp"
#include "stssl/error.hpp"

namespace stssl::train {

namespace {

void check_horizon(std::size_t horizon) {
    if (horizon < 1 || horizon > kHorizonCount) throw ContractError("horizon must lie in 1..7");
}

} // namespace

std::string error_distribution_csv(const TrainedModel& m, const data::DatasetSplit& split, std::size_t horizon,
                                   int threads) {
    check_horizon(horizon);
    if (split.test.empty()) throw ContractError("export: test split is empty");
    const auto preds = predict(m, split.test, threads);
    const auto angle = data::index(data::Variable::WindAngle);
    const std::string h_label = std::to_string(24 * horizon);
    std::string out = std::string(kErrorsHeader) + "\n";
    for (std::size_t k = 0; k < split.test.size(); ++k) {
        const auto& w = split.test[k];
        const auto [obs, valid] = observed(split.raw, w, horizon);
        const std::string prefix = std::to_string(k) + "," + data::format_date(w.anchor_day) + ",";
        for (std::size_t i = 0; i < split.raw.region_count(); ++i)
            for (std::size_t v = 0; v < data::kVariables; ++v) {
                if (!valid[i * data::kVariables + v]) continue;
                const double p = preds[k].at(i, horizon - 1, v);
                const double e = v == angle ? angular_error(p, obs.at(i, v)) : std::abs(p - obs.at(i, v));
                out += prefix + std::to_string(split.raw.regions[i].id) + "," +
                       std::string(data::kVariableSpecs[v].name) + "," + h_label + "," + data::format_double(e) + "\n";
            }
    }
    return out;
}

std::string field_grid_csv(const TrainedModel& m, const data::DatasetSplit& split, std::size_t sample,
                           std::size_t horizon) {
    check_horizon(horizon);
    if (sample >= split.test.size()) {
        throw ContractError("sample " + std::to_string(sample) + " out of range; test split has " +
                            std::to_string(split.test.size()) + " samples");
    }
    const auto& w = split.test[sample];
    const auto pred = predict(m, {w}, 1).front();
    const auto [obs, valid] = observed(split.raw, w, horizon);
    std::string out = "region_id,x_km,y_km";
    for (const auto& s : data::kVariableSpecs) out += ",observed_" + std::string(s.name);
    for (const auto& s : data::kVariableSpecs) out += ",predicted_" + std::string(s.name);
    out += "\n";
    for (std::size_t i = 0; i < split.raw.region_count(); ++i) {
        const auto& r = split.raw.regions[i];
        out += std::to_string(r.id) + "," + data::format_double(r.x_km) + "," + data::format_double(r.y_km);
        for (std::size_t v = 0; v < data::kVariables; ++v) {
            out += ",";
            if (valid[i * data::kVariables + v]) out += data::format_double(obs.at(i, v));
        }
        for (std::size_t v = 0; v < data::kVariables; ++v) out += "," + data::format_double(pred.at(i, horizon - 1, v));
        out += "\n";
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace stssl::train
