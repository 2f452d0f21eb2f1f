// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/train/metrics.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "stssl/error.hpp"

namespace stssl::train {

namespace {

void check_inputs(const char* what, std::span<const double> pred, std::span<const double> actual,
                  const std::vector<bool>& mask) {
    if (pred.size() != actual.size() || mask.size() != pred.size()) {
        throw ShapeError(std::string(what) + ": sizes " + std::to_string(pred.size()) + ", " +
                         std::to_string(actual.size()) + ", mask " + std::to_string(mask.size()));
    }
}

} // namespace

double mae(std::span<const double> pred, std::span<const double> actual, const std::vector<bool>& mask) {
    check_inputs("mae", pred, actual, mask);
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        s += std::abs(pred[i] - actual[i]);
        ++count;
    }
    if (count == 0) throw ContractError("mae: no valid entries, metric undefined");
    return s / static_cast<double>(count);
}

double rmse(std::span<const double> pred, std::span<const double> actual, const std::vector<bool>& mask) {
    check_inputs("rmse", pred, actual, mask);
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        const double r = pred[i] - actual[i];
        s += r * r;
        ++count;
    }
    if (count == 0) throw ContractError("rmse: no valid entries, metric undefined");
    return std::sqrt(s / static_cast<double>(count));
}

std::string horizon_label(std::size_t h) { return std::to_string(24 * (h + 1)) + "h"; }

double angular_error(double a_deg, double b_deg) {
    double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

void MetricTable::add_row(MetricRow row) {
    for (std::size_t h = 0; h < kHorizonCount; ++h)
        for (std::size_t v = 0; v < data::kVariables; ++v) {
            const auto& c = row.cells[h][v];
            if (!(c.mae >= 0.0) || !(c.rmse >= 0.0)) {
                throw ContractError("metric row '" + row.label + "' has a negative or non-finite cell");
            }
            // Equal errors can round RMSE a few ulps below MAE.
            if (c.rmse < c.mae * (1.0 - 1e-12)) {
                throw ContractError("metric row '" + row.label + "': RMSE below MAE at " + horizon_label(h));
            }
        }
    rows_.push_back(std::move(row));
}

const MetricRow& MetricTable::row(const std::string& label) const {
    for (const auto& r : rows_)
        if (r.label == label) return r;
    throw ContractError("metric table has no row '" + label + "'");
}

std::string MetricTable::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    auto& horizons = j["horizons"] = nlohmann::ordered_json::array();
    for (std::size_t h = 0; h < kHorizonCount; ++h) horizons.push_back(horizon_label(h));
    auto& vars = j["variables"] = nlohmann::ordered_json::array();
    for (const auto& spec : data::kVariableSpecs) vars.push_back(std::string(spec.name));
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows_) {
        nlohmann::ordered_json row;
        row["label"] = r.label;
        auto& metrics = row["metrics"];
        for (std::size_t v = 0; v < data::kVariables; ++v) {
            auto& cells = metrics[std::string(data::kVariableSpecs[v].name)] = nlohmann::ordered_json::array();
            for (std::size_t h = 0; h < kHorizonCount; ++h) {
                cells.push_back({{"horizon", horizon_label(h)}, {"mae", r.cells[h][v].mae}, {"rmse", r.cells[h][v].rmse}});
            }
        }
        rows.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string MetricTable::to_csv() const {
    std::string out = "label,variable,horizon,mae,rmse\n";
    char buf[64];
    for (const auto& r : rows_)
        for (std::size_t v = 0; v < data::kVariables; ++v)
            for (std::size_t h = 0; h < kHorizonCount; ++h) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.cells[h][v].mae, r.cells[h][v].rmse);
                out += r.label + "," + std::string(data::kVariableSpecs[v].name) + "," + horizon_label(h) + "," + buf +
                       "\n";
            }
    return out;
}

std::string MetricTable::to_text(data::Variable var) const {
    const auto v = data::index(var);
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-12s", std::string(data::kVariableSpecs[v].name).c_str());
    out += buf;
    for (std::size_t h = 0; h < kHorizonCount; ++h) {
        std::snprintf(buf, sizeof buf, " %13s", horizon_label(h).c_str());
        out += buf;
    }
    out += "\n";
    for (const auto& r : rows_) {
        std::snprintf(buf, sizeof buf, "%-12s", r.label.c_str());
        out += buf;
        for (std::size_t h = 0; h < kHorizonCount; ++h) {
            std::snprintf(buf, sizeof buf, " %6.3f/%6.3f", r.cells[h][v].mae, r.cells[h][v].rmse);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace stssl::train
