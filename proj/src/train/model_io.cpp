// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/train/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stssl/error.hpp"

namespace stssl::train {

using nlohmann::ordered_json;
using num::Shape;
using num::Tensor;

namespace {

ordered_json tensor_json(const Tensor& t) {
    return {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from(const nlohmann::json& j) {
    return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

ordered_json group_json(const graph::ParameterGroup& group) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : group) {
        auto entry = tensor_json(p.value);
        arr.push_back({{"name", p.name}, {"shape", entry["shape"]}, {"data", entry["data"]}});
    }
    return arr;
}

void load_group(const nlohmann::json& j, graph::ParameterGroup& group, const char* what) {
    if (j.size() != group.size()) {
        throw IncompatibleError(std::string("parameter group '") + what + "' has " + std::to_string(j.size()) +
                                " entries, configuration expects " + std::to_string(group.size()));
    }
    for (std::size_t k = 0; k < group.size(); ++k) {
        const auto& e = j[k];
        const auto name = e.at("name").get<std::string>();
        if (name != group[k].name) {
            throw IncompatibleError("parameter '" + name + "' found where '" + group[k].name + "' was expected");
        }
        Tensor value = tensor_from(e);
        if (value.shape() != group[k].value.shape()) {
            throw IncompatibleError("parameter '" + name + "' has shape " + num::to_string(value.shape()) +
                                    ", configuration expects " + num::to_string(group[k].value.shape()));
        }
        group[k].value = std::move(value);
        group[k].gradient = Tensor(group[k].value.shape(), 0.0);
    }
}

} // namespace

std::string model_to_json(const TrainedModel& m) {
    const auto& c = m.model.config;
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["variant"] = std::string(1, m.variant);
    j["config"] = {{"layers", c.layers},         {"hidden", c.hidden},     {"attention_width", c.attention_width},
                   {"gamma_corr", c.gamma_corr}, {"tau_edge", c.tau_edge}, {"horizons", c.horizons},
                   {"channels", c.channels},     {"input_steps", c.input_steps}, {"enable_gnn", c.enable_gnn}};
    auto& regions = j["regions"] = ordered_json::array();
    for (const auto& r : m.model.graph.regions) regions.push_back({{"id", r.id}, {"x_km", r.x_km}, {"y_km", r.y_km}});
    j["adjacency"] = tensor_json(m.model.graph.adjacency);
    j["stats"] = {{"mean", m.stats.mean}, {"stddev", m.stats.stddev}};
    auto& params = j["parameters"];
    params["encoder"] = group_json(m.model.encoder);
    if (!m.model.gnn.empty()) params["gnn"] = group_json(m.model.gnn);
    params["readout"] = group_json(m.model.readout);
    return j.dump(1) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw IncompatibleError("unsupported model format version " + std::to_string(version) + " (expected " +
                                    std::to_string(kModelFormatVersion) + ")");
        }
        TrainedModel m;
        const auto tag = j.at("variant").get<std::string>();
        if (tag.size() != 1) throw SchemaError("variant must be a single letter");
        m.variant = variant(tag[0]).tag;

        const auto& jc = j.at("config");
        graph::GnnConfig c;
        c.layers = jc.at("layers").get<int>();
        c.hidden = jc.at("hidden").get<int>();
        c.attention_width = jc.at("attention_width").get<int>();
        c.gamma_corr = jc.at("gamma_corr").get<double>();
        c.tau_edge = jc.at("tau_edge").get<double>();
        c.horizons = jc.at("horizons").get<int>();
        c.channels = jc.at("channels").get<int>();
        c.input_steps = jc.at("input_steps").get<int>();
        c.enable_gnn = jc.at("enable_gnn").get<bool>();

        std::vector<graph::Region> regions;
        for (const auto& r : j.at("regions")) {
            regions.push_back({r.at("id").get<int>(), r.at("x_km").get<double>(), r.at("y_km").get<double>()});
        }
        Tensor adjacency = tensor_from(j.at("adjacency"));
        if (adjacency.shape() != Shape{regions.size(), regions.size()}) {
            throw IncompatibleError("adjacency shape " + num::to_string(adjacency.shape()) + " does not match " +
                                    std::to_string(regions.size()) + " regions");
        }
        auto g = graph::make_graph(std::move(regions), std::move(adjacency), c.tau_edge);
        m.model = graph::init_model(c, std::move(g), 0);

        const auto& jp = j.at("parameters");
        load_group(jp.at("encoder"), m.model.encoder, "encoder");
        if (jp.contains("gnn")) {
            load_group(jp.at("gnn"), m.model.gnn, "gnn");
        } else if (!m.model.gnn.empty()) {
            throw IncompatibleError("configuration enables message passing but the file has no gnn group");
        }
        load_group(jp.at("readout"), m.model.readout, "readout");

        const auto& js = j.at("stats");
        m.stats.mean = js.at("mean").get<decltype(m.stats.mean)>();
        m.stats.stddev = js.at("stddev").get<decltype(m.stats.stddev)>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << model_to_json(m);
    if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void check_compatible(const TrainedModel& m, const data::WeatherSeries& s) {
    const auto& regions = m.model.graph.regions;
    if (s.region_count() != regions.size()) {
        throw IncompatibleError("model expects " + std::to_string(regions.size()) + " regions × " +
                                std::to_string(data::kVariables) + " variables, data has " +
                                std::to_string(s.region_count()) + " regions");
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (!(s.regions[i] == regions[i])) {
            throw IncompatibleError("region " + std::to_string(i) + " coordinates differ between model and data");
        }
    }
}

} // namespace stssl::train
