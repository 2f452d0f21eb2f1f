// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/datasets/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "stssl/error.hpp"

namespace stssl::data {

using num::Shape;
using num::Tensor;

namespace {

struct Row {
    Day day;
    int region;
    std::array<std::optional<double>, kVariables> values;
    std::size_t line;
};

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_number(std::string_view text, std::size_t line, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(text) + "'", line);
    }
    return v;
}

int parse_id(std::string_view text, std::size_t line) {
    int v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw ParseError("invalid region id '" + std::string(text) + "'", line);
    }
    return v;
}

WeatherSeries assemble(std::vector<graph::Region> regions, std::vector<Row> rows) {
    std::sort(regions.begin(), regions.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    graph::validate_regions(regions);
    if (rows.empty()) throw SchemaError("no data rows");
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.day != b.day ? a.day < b.day : a.region < b.region; });

    std::vector<Day> days;
    for (const auto& r : rows) {
        if (r.region < 0 || static_cast<std::size_t>(r.region) >= regions.size()) {
            throw ParseError("unknown region id " + std::to_string(r.region), r.line);
        }
        if (days.empty() || days.back() != r.day) days.push_back(r.day);
    }
    for (std::size_t k = 1; k < days.size(); ++k) {
        if (days[k] - days[k - 1] != std::chrono::days(1)) {
            throw SchemaError("timestamps are not uniformly daily between " + format_date(days[k - 1]) + " and " +
                              format_date(days[k]));
        }
    }

    const std::size_t n = regions.size();
    WeatherSeries s;
    s.regions = std::move(regions);
    s.start = days.front();
    s.values = Tensor(Shape{days.size(), n, kVariables}, 0.0);
    s.valid.assign(s.values.size(), false);
    std::vector<bool> seen(days.size() * n, false);
    for (const auto& r : rows) {
        const auto t = static_cast<std::size_t>((r.day - s.start).count());
        const auto i = static_cast<std::size_t>(r.region);
        if (seen[t * n + i]) {
            throw SchemaError("duplicate row for " + format_date(r.day) + " region " + std::to_string(r.region));
        }
        seen[t * n + i] = true;
        for (std::size_t v = 0; v < kVariables; ++v) {
            if (!r.values[v]) continue;
            s.values.at(t, i, v) = *r.values[v];
            s.valid[(t * n + i) * kVariables + v] = true;
        }
    }
    validate(s);
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_json(const std::filesystem::path& path) { return path.extension() == ".json"; }

} // namespace

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

WeatherSeries parse_csv(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start < text.size()) {
            auto pos = text.find('\n', start);
            if (pos == std::string::npos) pos = text.size();
            std::string line = text.substr(start, pos - start);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
            start = pos + 1;
        }
    }
    if (lines.empty() || lines[0] != kRegionHeader) {
        throw ParseError("expected region header '" + std::string(kRegionHeader) + "'", 1);
    }

    std::vector<graph::Region> regions;
    std::size_t k = 1;
    for (; k < lines.size(); ++k) {
        std::string_view line = lines[k];
        if (line.starts_with("timestamp")) break;
        if (line.starts_with("#")) line.remove_prefix(line.starts_with("# ") ? 2 : 1);
        if (line.empty()) continue;
        const auto f = split_commas(line);
        if (f.size() != 3) throw ParseError("region line needs id,x_km,y_km", k + 1);
        regions.push_back({parse_id(f[0], k + 1), parse_number(f[1], k + 1, "x_km"), parse_number(f[2], k + 1, "y_km")});
    }
    if (k == lines.size()) throw ParseError("missing column header line", k);

    const auto header = split_commas(lines[k]);
    if (header.size() < 2 || header[0] != "timestamp" || header[1] != "region_id") {
        throw SchemaError("column header must start with timestamp,region_id");
    }
    std::vector<std::size_t> column_var;
    std::array<bool, kVariables> present{};
    for (std::size_t c = 2; c < header.size(); ++c) {
        const auto v = index(variable_from_name(header[c]));
        if (present[v]) throw SchemaError("duplicate column '" + std::string(header[c]) + "'");
        present[v] = true;
        column_var.push_back(v);
    }
    for (std::size_t v = 0; v < kVariables; ++v) {
        if (!present[v]) throw SchemaError("missing column '" + std::string(kVariableSpecs[v].name) + "'");
    }

    std::vector<Row> rows;
    for (++k; k < lines.size(); ++k) {
        const std::size_t lineno = k + 1;
        if (lines[k].empty()) continue;
        const auto f = split_commas(lines[k]);
        if (f.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()),
                             lineno);
        }
        Row r;
        r.line = lineno;
        try {
            r.day = parse_date(f[0]);
        } catch (const SchemaError& e) {
            throw ParseError(e.what(), lineno);
        }
        r.region = parse_id(f[1], lineno);
        for (std::size_t c = 0; c < column_var.size(); ++c) {
            const auto cell = f[c + 2];
            if (!cell.empty()) r.values[column_var[c]] = parse_number(cell, lineno, "value");
        }
        rows.push_back(r);
    }
    return assemble(std::move(regions), std::move(rows));
}

WeatherSeries parse_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto end = std::min<std::size_t>(e.byte, text.size());
        throw ParseError(e.what(), 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n')));
    }
    try {
        std::vector<graph::Region> regions;
        for (const auto& r : j.at("regions")) {
            regions.push_back({r.at("id").get<int>(), r.at("x_km").get<double>(), r.at("y_km").get<double>()});
        }
        std::vector<Row> rows;
        std::size_t idx = 0;
        for (const auto& rec : j.at("rows")) {
            Row r;
            r.line = ++idx;
            for (const auto& [key, val] : rec.items()) {
                if (key != "timestamp" && key != "region_id") variable_from_name(key);
            }
            r.day = parse_date(rec.at("timestamp").get<std::string>());
            r.region = rec.at("region_id").get<int>();
            for (std::size_t v = 0; v < kVariables; ++v) {
                const auto& cell = rec.at(std::string(kVariableSpecs[v].name));
                if (!cell.is_null()) r.values[v] = cell.get<double>();
            }
            rows.push_back(r);
        }
        return assemble(std::move(regions), std::move(rows));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed series JSON: ") + e.what());
    }
}

WeatherSeries ingest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return is_json(path) ? parse_json(text) : parse_csv(text);
}

std::string to_csv(const WeatherSeries& s) {
    std::string out;
    out += kRegionHeader;
    out += '\n';
    for (const auto& r : s.regions) {
        out += std::to_string(r.id) + "," + format_double(r.x_km) + "," + format_double(r.y_km) + "\n";
    }
    out += kColumnHeader;
    out += '\n';
    for (std::size_t t = 0; t < s.steps(); ++t) {
        const std::string date = format_date(s.day(t));
        for (std::size_t i = 0; i < s.region_count(); ++i) {
            out += date;
            out += ',';
            out += std::to_string(s.regions[i].id);
            for (std::size_t v = 0; v < kVariables; ++v) {
                out += ',';
                if (s.is_valid(t, i, v)) out += format_double(s.values.at(t, i, v));
            }
            out += '\n';
        }
    }
    return out;
}

std::string to_json(const WeatherSeries& s) {
    nlohmann::ordered_json j;
    j["regions"] = nlohmann::ordered_json::array();
    for (const auto& r : s.regions) j["regions"].push_back({{"id", r.id}, {"x_km", r.x_km}, {"y_km", r.y_km}});
    j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < s.steps(); ++t)
        for (std::size_t i = 0; i < s.region_count(); ++i) {
            nlohmann::ordered_json rec;
            rec["timestamp"] = format_date(s.day(t));
            rec["region_id"] = s.regions[i].id;
            for (std::size_t v = 0; v < kVariables; ++v) {
                const std::string key(kVariableSpecs[v].name);
                if (s.is_valid(t, i, v))
                    rec[key] = s.values.at(t, i, v);
                else
                    rec[key] = nullptr;
            }
            j["rows"].push_back(std::move(rec));
        }
    return j.dump() + "\n";
}

void write_series(const WeatherSeries& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << (is_json(path) ? to_json(s) : to_csv(s));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace stssl::data
