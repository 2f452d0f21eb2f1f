// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: synthesize data, train, evaluate, run the
// ablation ladder and export plot-ready CSVs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stssl/datasets/io.hpp"
#include "stssl/datasets/synth.hpp"
#include "stssl/datasets/windows.hpp"
#include "stssl/error.hpp"
#include "stssl/train/ablation.hpp"
#include "stssl/train/exports.hpp"
#include "stssl/train/model_io.hpp"
#include "stssl/train/training.hpp"

namespace fs = std::filesystem;
using namespace stssl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTraining = 3;
constexpr int kExitIncompatible = 4;

constexpr const char* kOutputDirEnv = "STSSL_OUTPUT_DIR";
constexpr int kMinWindowDays = 14;

class UsageError : public Error {
public:
    using Error::Error;
};

/// Flat `key = value` settings. Later sources override earlier ones.
using Settings = std::map<std::string, std::string>;

Settings read_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path.string());
    Settings out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(number) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw UsageError(key + ": '" + v + "' is not a number");
    return x;
}

long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw UsageError(key + ": '" + v + "' is not an integer");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError(key + ": '" + v + "' is not a boolean");
}

/// Training keys accepted in config files and as --<key> flags (underscores
/// become dashes on the command line).
struct ConfigKey {
    const char* key;
    const char* help;
    std::function<void(train::TrainConfig&, const std::string&)> apply;
};

const std::vector<ConfigKey>& training_keys() {
    using train::TrainConfig;
    static const std::vector<ConfigKey> keys{
        {"learning_rate", "SGD step size",
         [](TrainConfig& c, const std::string& v) { c.learning_rate = to_double("learning_rate", v); }},
        {"batch_size", "windows per batch",
         [](TrainConfig& c, const std::string& v) { c.batch_size = int(to_integer("batch_size", v)); }},
        {"epochs", "main-phase epoch budget",
         [](TrainConfig& c, const std::string& v) { c.epochs = int(to_integer("epochs", v)); }},
        {"weight_decay", "L2 decay added to every gradient",
         [](TrainConfig& c, const std::string& v) { c.weight_decay = to_double("weight_decay", v); }},
        {"alpha", "contrastive weight",
         [](TrainConfig& c, const std::string& v) { c.alpha = to_double("alpha", v); }},
        {"beta", "consistency weight",
         [](TrainConfig& c, const std::string& v) { c.beta = to_double("beta", v); }},
        {"delta_t", "consistency window in days",
         [](TrainConfig& c, const std::string& v) { c.delta_t = int(to_integer("delta_t", v)); }},
        {"sigma_spatial", "distance scale of adjacency and spatial weights",
         [](TrainConfig& c, const std::string& v) { c.sigma_spatial = to_double("sigma_spatial", v); }},
        {"early_stop_patience", "epochs without validation improvement before stopping",
         [](TrainConfig& c, const std::string& v) {
             c.early_stop_patience = int(to_integer("early_stop_patience", v));
         }},
        {"pretrain_epochs", "self-supervised warm-start epochs",
         [](TrainConfig& c, const std::string& v) { c.pretrain_epochs = int(to_integer("pretrain_epochs", v)); }},
        {"seed", "initialisation and shuffling seed",
         [](TrainConfig& c, const std::string& v) { c.seed = std::uint64_t(to_integer("seed", v)); }},
        {"threads", "evaluation threads",
         [](TrainConfig& c, const std::string& v) { c.eval_threads = int(to_integer("threads", v)); }},
        {"layers", "message-passing layers",
         [](TrainConfig& c, const std::string& v) { c.gnn.layers = int(to_integer("layers", v)); }},
        {"hidden", "embedding width",
         [](TrainConfig& c, const std::string& v) { c.gnn.hidden = int(to_integer("hidden", v)); }},
        {"attention_width", "attention projection width",
         [](TrainConfig& c, const std::string& v) { c.gnn.attention_width = int(to_integer("attention_width", v)); }},
        {"gamma_corr", "correlation scaling of the adjacency",
         [](TrainConfig& c, const std::string& v) { c.gnn.gamma_corr = to_double("gamma_corr", v); }},
        {"tau_edge", "edge threshold",
         [](TrainConfig& c, const std::string& v) { c.gnn.tau_edge = to_double("tau_edge", v); }},
        {"gamma_adapt", "weight of the spatial adaptation term",
         [](TrainConfig& c, const std::string& v) { c.adapt.gamma_adapt = to_double("gamma_adapt", v); }},
        {"h_split", "last horizon counted as short-term",
         [](TrainConfig& c, const std::string& v) { c.adapt.h_split = int(to_integer("h_split", v)); }},
        {"t_min", "shortest horizon in days",
         [](TrainConfig& c, const std::string& v) { c.adapt.t_min = int(to_integer("t_min", v)); }},
        {"t_max", "longest horizon in days",
         [](TrainConfig& c, const std::string& v) { c.adapt.t_max = int(to_integer("t_max", v)); }},
        {"target_region", "region anchoring the spatial weights; negative picks the central one",
         [](TrainConfig& c, const std::string& v) { c.adapt.target_region = int(to_integer("target_region", v)); }},
    };
    return keys;
}

std::string flag_name(std::string key) {
    for (auto& ch : key)
        if (ch == '_') ch = '-';
    return "--" + key;
}

/// Options shared by every command. Values stay strings until the config
/// file has been merged underneath them.
struct Common {
    std::string config_path;
    std::string output_dir;
    Settings flags;  // only options given on the command line
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void attach(CLI::App& app, const std::vector<std::pair<std::string, std::string>>& keys) {
        app.add_option("--config", config_path, "key = value file; flags override its entries")
            ->check(CLI::ExistingFile);
        app.add_option("--output-dir", output_dir,
                       std::string("artifact directory (default: $") + kOutputDirEnv + " or ./out)");
        for (const auto& [key, help] : keys) {
            auto* opt = app.add_option(flag_name(key), flags[key], help)
                            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            options.emplace_back(key, opt);
        }
    }

    /// Config file entries overlaid by explicitly given flags.
    Settings resolve() const {
        Settings out;
        if (!config_path.empty()) out = read_config_file(config_path);
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) out[key] = flags.at(key);
        return out;
    }

    fs::path output_root(const Settings& s) const {
        std::string dir = "out";
        if (auto it = s.find("output_dir"); it != s.end()) dir = it->second;
        if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
        if (!output_dir.empty()) dir = output_dir;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
        return dir;
    }
};

std::vector<std::pair<std::string, std::string>> data_keys() {
    return {{"data", "dataset file (.csv or .json)"},
            {"synth", "use a synthesized dataset instead of a file (true/false)"},
            {"regions", "synthesized region count"},
            {"days", "synthesized days"},
            {"data_seed", "synthesized data seed"},
            {"missing_rate", "synthesized missing-entry probability"},
            {"start", "synthesized start date YYYY-MM-DD"}};
}

std::vector<std::pair<std::string, std::string>> train_keys() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : training_keys()) out.emplace_back(k.key, k.help);
    return out;
}

template <class... Lists>
std::vector<std::pair<std::string, std::string>> join(Lists... lists) {
    std::vector<std::pair<std::string, std::string>> out;
    (out.insert(out.end(), lists.begin(), lists.end()), ...);
    return out;
}

const std::string* find(const Settings& s, const std::string& key) {
    const auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
}

/// The synth command seeds data with --seed; elsewhere --seed belongs to
/// training and the data seed is --data-seed.
data::SynthSpec synth_spec(const Settings& s, const std::string& seed_key) {
    data::SynthSpec spec;
    if (auto* v = find(s, "regions")) spec.regions = int(to_integer("regions", *v));
    if (auto* v = find(s, "days")) spec.days = int(to_integer("days", *v));
    if (auto* v = find(s, seed_key)) spec.seed = std::uint64_t(to_integer(seed_key, *v));
    if (auto* v = find(s, "missing_rate")) spec.missing_rate = to_double("missing_rate", *v);
    if (auto* v = find(s, "start")) {
        try {
            spec.start = data::parse_date(*v);
        } catch (const Error& e) {
            throw UsageError(std::string("start: ") + e.what());
        }
    }
    if (spec.days < kMinWindowDays) {
        throw UsageError("days must be at least " + std::to_string(kMinWindowDays) + " to form one window");
    }
    if (spec.days < data::kMinSynthDays) {
        throw UsageError("days must be at least " + std::to_string(data::kMinSynthDays) +
                         " for a train/validation/test split");
    }
    if (spec.regions < data::kMinSynthRegions) {
        throw UsageError("regions must be at least " + std::to_string(data::kMinSynthRegions));
    }
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) throw UsageError("missing_rate must lie in [0, 1)");
    return spec;
}

/// Exactly one of a dataset file or a synthesized spec.
data::WeatherSeries load_data(const Settings& s) {
    const auto* path = find(s, "data");
    const bool synth = find(s, "synth") && to_bool("synth", *find(s, "synth"));
    if ((path != nullptr) == synth) throw UsageError("give exactly one of --data or --synth true");
    if (synth) return data::synthesize(synth_spec(s, "data_seed"));
    return data::ingest(*path);
}

train::TrainConfig training_config(const Settings& s) {
    train::TrainConfig c;
    for (const auto& k : training_keys())
        if (auto* v = find(s, k.key)) k.apply(c, *v);
    try {
        train::validate(c);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    return c;
}

char variant_tag(const std::string& v) {
    if (v.size() != 1 || v[0] < 'a' || v[0] > 'g') throw UsageError("variant must be one of a..g");
    return v[0];
}

void print_summary(const train::MetricTable& table) {
    for (std::size_t v = 0; v < data::kVariables; ++v) {
        std::cout << table.to_text(static_cast<data::Variable>(v));
    }
}

std::string log_line(const train::TrainingLog& log) {
    std::ostringstream out;
    out << "variant " << log.variant << ": best epoch " << log.best_epoch << ", validation MAE "
        << log.best_validation_mae << (log.stopped_early ? " (stopped early)" : "");
    return out.str();
}

int cmd_synth(const Common& common) {
    const auto s = common.resolve();
    const auto spec = synth_spec(s, "seed");
    const auto root = common.output_root(s);
    std::string name = "synth.csv";
    if (auto* v = find(s, "output")) name = *v;
    const auto path = root / name;
    const auto series = data::synthesize(spec);
    data::write_series(series, path);
    std::cout << "T=" << series.steps() << " n=" << series.region_count() << " missing=" << series.missing_count()
              << " -> " << path.string() << "\n";
    return kExitOk;
}

int cmd_train(const Common& common) {
    const auto s = common.resolve();
    const auto config = training_config(s);
    const char tag = variant_tag(find(s, "variant") ? *find(s, "variant") : "g");
    const auto root = common.output_root(s);
    const auto split = data::make_split(load_data(s));
    const auto result = train::train(split, train::variant(tag), config);
    std::string model_name = "model.json";
    if (auto* v = find(s, "model")) model_name = *v;
    train::save_model(result.trained, root / model_name);
    train::write_text(root / "train_log.json", result.log.to_json());
    std::cout << log_line(result.log) << "\n" << "model -> " << (root / model_name).string() << "\n";
    return kExitOk;
}

train::TrainedModel load_input_model(const Settings& s) {
    const auto* path = find(s, "model");
    if (!path) throw UsageError("--model is required");
    return train::load_model(*path);
}

/// Split of the data encoded with the model's own statistics.
data::DatasetSplit split_for(const train::TrainedModel& m, const Settings& s) {
    const auto series = load_data(s);
    train::check_compatible(m, series);
    return data::make_split(series, {}, &m.stats);
}

int cmd_eval(const Common& common) {
    const auto s = common.resolve();
    const auto config = training_config(s);
    const auto root = common.output_root(s);
    const auto model = load_input_model(s);
    const auto split = split_for(model, s);
    const auto table = train::evaluate(model, split, std::string(1, model.variant), config.eval_threads);
    train::write_text(root / "metrics.json", table.to_json());
    train::write_text(root / "metrics.csv", table.to_csv());
    print_summary(table);
    return kExitOk;
}

std::vector<char> ablation_tags(const Settings& s) {
    std::string list = "abcdefg";
    if (auto* v = find(s, "variants")) list = *v;
    std::vector<char> tags;
    for (char c : list) {
        if (c == ',' || c == ' ') continue;
        variant_tag(std::string(1, c));
        tags.push_back(c);
    }
    if (tags.empty()) throw UsageError("variants: empty list");
    return tags;
}

int cmd_ablate(const Common& common) {
    const auto s = common.resolve();
    const auto config = training_config(s);
    const auto tags = ablation_tags(s);
    const auto root = common.output_root(s);
    const auto split = data::make_split(load_data(s));
    fs::create_directories(root / "logs");

    nlohmann::ordered_json manifest;
    manifest["seed"] = config.seed;
    manifest["planned"] = std::string(tags.begin(), tags.end());
    manifest["completed"] = nlohmann::ordered_json::array();
    manifest["finished"] = false;
    const auto write_manifest = [&] { train::write_text(root / "manifest.json", manifest.dump(2) + "\n"); };
    write_manifest();

    const auto report = train::run_ablation(split, config, tags, [&](const train::AblationOutcome& o) {
        const std::string tag(1, o.variant.tag);
        train::write_text(root / "logs" / ("variant_" + tag + ".json"), o.result.log.to_json());
        manifest["completed"].push_back(tag);
        write_manifest();
        std::cout << log_line(o.result.log) << ", 24h temperature MAE "
                  << o.metrics.cells[0][data::index(data::Variable::Temperature)].mae << "\n"
                  << std::flush;
    });

    train::write_text(root / "report.json", report.table.to_json());
    train::write_text(root / "report.csv", report.table.to_csv());
    std::string text;
    for (std::size_t v = 0; v < data::kVariables; ++v) text += report.table.to_text(static_cast<data::Variable>(v));
    train::write_text(root / "report.txt", text);
    manifest["finished"] = true;
    write_manifest();
    std::cout << report.table.to_text(data::Variable::Temperature);
    return kExitOk;
}

std::size_t horizon_of(const Settings& s) {
    long long h = 1;
    if (auto* v = find(s, "horizon")) h = to_integer("horizon", *v);
    if (h < 1 || h > 7) throw UsageError("horizon must lie in 1..7");
    return std::size_t(h);
}

int cmd_export_errors(const Common& common) {
    const auto s = common.resolve();
    const auto config = training_config(s);
    const auto horizon = horizon_of(s);
    const auto root = common.output_root(s);
    const auto model = load_input_model(s);
    const auto split = split_for(model, s);
    const auto path = root / ("errors_h" + std::to_string(horizon) + ".csv");
    train::write_text(path, train::error_distribution_csv(model, split, horizon, config.eval_threads));
    std::cout << "errors -> " << path.string() << "\n";
    return kExitOk;
}

int cmd_export_fields(const Common& common) {
    const auto s = common.resolve();
    const auto horizon = horizon_of(s);
    long long sample = 0;
    if (auto* v = find(s, "sample")) sample = to_integer("sample", *v);
    if (sample < 0) throw UsageError("sample must be nonnegative");
    const auto root = common.output_root(s);
    const auto model = load_input_model(s);
    const auto split = split_for(model, s);
    if (std::size_t(sample) >= split.test.size()) {
        throw UsageError("sample " + std::to_string(sample) + " out of range; test split has " +
                         std::to_string(split.test.size()) + " windows");
    }
    const auto path = root / ("fields_s" + std::to_string(sample) + "_h" + std::to_string(horizon) + ".csv");
    train::write_text(path, train::field_grid_csv(model, split, std::size_t(sample), horizon));
    std::cout << "fields -> " << path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal graph forecasting with self-supervised regularization"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* help;
        std::vector<std::pair<std::string, std::string>> keys;
        int (*run)(const Common&);
    };
    const std::vector<std::pair<std::string, std::string>> model_key{{"model", "model file"}};
    std::vector<Command> commands{
        {"synth", "write a synthesized dataset",
         {{"regions", "region count"},
          {"days", "days (at least 28)"},
          {"seed", "data seed"},
          {"missing_rate", "missing-entry probability"},
          {"start", "start date YYYY-MM-DD"},
          {"output", "file name under the output directory (.csv or .json)"}},
         cmd_synth},
        {"train", "train one ablation variant",
         join(data_keys(), train_keys(),
              std::vector<std::pair<std::string, std::string>>{{"variant", "ablation variant a..g (default g)"},
                                                               {"model", "model file name (default model.json)"}}),
         cmd_train},
        {"eval", "evaluate a stored model on the test split", join(data_keys(), train_keys(), model_key), cmd_eval},
        {"ablate", "train and evaluate the ablation ladder",
         join(data_keys(), train_keys(),
              std::vector<std::pair<std::string, std::string>>{{"variants", "tags to run (default abcdefg)"}}),
         cmd_ablate},
        {"export-errors", "per-sample absolute errors at one horizon",
         join(data_keys(), train_keys(), model_key,
              std::vector<std::pair<std::string, std::string>>{{"horizon", "horizon in days (default 1)"}}),
         cmd_export_errors},
        {"export-fields", "observed and predicted fields for one test sample",
         join(data_keys(), train_keys(), model_key,
              std::vector<std::pair<std::string, std::string>>{{"sample", "test window index (default 0)"},
                                                               {"horizon", "horizon in days (default 1)"}}),
         cmd_export_fields},
    };

    std::vector<Common> commons(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < commands.size(); ++k) {
        auto* sub = app.add_subcommand(commands[k].name, commands[k].help);
        commons[k].attach(*sub, commands[k].keys);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (std::size_t k = 0; k < commands.size(); ++k) {
            if (!subs[k]->parsed()) continue;
            return commands[k].run(commons[k]);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return kExitTraining;
    } catch (const IncompatibleError& e) {
        std::cerr << "incompatible model and data: " << e.what() << "\n";
        return kExitIncompatible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitUsage;
}
