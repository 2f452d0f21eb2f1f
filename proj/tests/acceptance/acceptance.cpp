// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion with its measured
// quantity and wall time; exits nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stssl/adaptation/adaptation.hpp"
#include "stssl/datasets/io.hpp"
#include "stssl/datasets/synth.hpp"
#include "stssl/datasets/windows.hpp"
#include "stssl/graph/model.hpp"
#include "stssl/numerics/optim.hpp"
#include "stssl/train/metrics.hpp"
#include "stssl/train/training.hpp"

namespace fs = std::filesystem;
using namespace stssl;
using num::Shape;
using num::Tensor;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    const char* name;
    double time_limit_s;  // 0 when the criterion has no runtime bound
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = u(rng);
    return t;
}

std::vector<graph::Region> scattered(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 800.0);
    std::vector<graph::Region> r;
    for (std::size_t k = 0; k < n; ++k) r.push_back({int(k), u(rng), u(rng)});
    return r;
}

/// Histories with a shared factor so that positive and negative
/// correlations both occur.
Tensor correlated_history(std::size_t steps, std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> load(-1.0, 1.5);
    std::vector<double> loading(n);
    for (auto& l : loading) l = load(rng);
    Tensor h(Shape{steps, n, d});
    for (std::size_t t = 0; t < steps; ++t) {
        const double common = g(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t v = 0; v < d; ++v) h.at(t, i, v) = loading[i] * common + 0.7 * g(rng);
    }
    return h;
}

train::TrainConfig toy_config() {
    train::TrainConfig c;
    c.gnn.hidden = 4;
    c.gnn.attention_width = 3;
    c.gnn.layers = 2;
    c.alpha = 0.5;
    c.beta = 0.5;
    return c;
}

std::vector<const data::SampleWindow*> leading(const std::vector<data::SampleWindow>& w, std::size_t k) {
    std::vector<const data::SampleWindow*> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(&w[i]);
    return out;
}

Outcome gradient_suite() {
    std::mt19937_64 rng(101);
    double worst[3] = {0, 0, 0};

    // (i) one message-passing layer with its attention projection
    {
        const std::size_t n = 5;
        auto regions = scattered(n, rng);
        auto a = graph::build_adjacency(regions, correlated_history(20, n, 3, rng), 0.5, 0.5);
        const auto g = graph::make_graph(std::move(regions), std::move(a), 0.05);
        num::Parameter h("h", uniform({n, 4}, rng));
        num::Parameter w("W", uniform({4, 4}, rng));
        num::Parameter proj("attend", uniform({4, 3}, rng));
        num::Parameter* ps[] = {&h, &w, &proj};
        worst[0] = num::finite_difference_check(
            [&](num::Tape& t) {
                const auto hv = t.param(h);
                const auto alpha = graph::compute_attention(num::matmul(hv, t.param(proj)), g);
                return num::sum(graph::message_passing_layer(hv, g, alpha, t.param(w)));
            },
            ps);
    }

    // (ii) weighted total and (iii) adaptation objective, through the model
    data::SynthSpec spec;
    spec.regions = 5;
    spec.days = 40;
    spec.missing_rate = 0.05;
    spec.seed = 5;
    const auto split = data::make_split(data::synthesize(spec));
    const auto batch = leading(split.train, 2);
    const auto check = [&](char tag, const train::ObjectiveTerms& terms) {
        const auto c = toy_config();
        auto model = train::initial_model(split, train::variant(tag), c);
        return num::finite_difference_check(
            [&](num::Tape& t) { return train::batch_objective(t, graph::bind(t, model), model, batch, terms, c).total; },
            model.parameters());
    };
    worst[1] = check('g', {false, true, true});
    worst[2] = check('c', {true, false, false});

    Outcome o;
    o.pass = worst[0] <= 1e-4 && worst[1] <= 1e-4 && worst[2] <= 1e-4;
    o.detail = "max relative discrepancy: layer " + fmt("%.2e", worst[0]) + ", total " + fmt("%.2e", worst[1]) +
               ", adaptation " + fmt("%.2e", worst[2]);
    return o;
}

Outcome graph_invariants() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> gamma(0.1, 4.0);
    std::uniform_real_distribution<double> tau(0.0, 0.9);
    std::size_t violations = 0;
    double worst_row = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + std::size_t(trial % 11);
        const double g = gamma(rng);
        auto regions = scattered(n, rng);
        auto a = graph::build_adjacency(regions, correlated_history(12, n, 2, rng), 0.5, g);
        for (std::size_t i = 0; i < n; ++i) {
            if (a.at(i, i) != 1.0) ++violations;
            for (std::size_t j = 0; j < n; ++j) {
                if (a.at(i, j) != a.at(j, i)) ++violations;
                if (i != j && !(a.at(i, j) >= 0.0 && a.at(i, j) <= 1.0 / g)) ++violations;
            }
        }
        const auto graph = graph::make_graph(std::move(regions), std::move(a), tau(rng));
        const auto alpha = graph::compute_attention(uniform({n, 5}, rng, -2.0, 2.0), graph);
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!graph.is_neighbor(i, j) && alpha.at(i, j) != 0.0) ++violations;
                row += alpha.at(i, j);
            }
            worst_row = std::max(worst_row, std::abs(row - 1.0));
        }
    }
    Outcome o;
    o.pass = violations == 0 && worst_row <= 1e-9;
    o.detail = "1000 graphs, " + std::to_string(violations) + " adjacency violations, max |row sum - 1| " +
               fmt("%.1e", worst_row);
    return o;
}

Outcome permutation_equivariance() {
    std::mt19937_64 rng(303);
    const std::size_t n = 6;
    auto regions = scattered(n, rng);
    auto a = graph::build_adjacency(regions, correlated_history(30, n, 7, rng), 0.5, 0.5);
    const auto g = graph::make_graph(std::move(regions), std::move(a), 0.05);
    const auto model = graph::init_model(graph::GnnConfig{}, g, 7);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto input = uniform({7, n, 7}, rng, -2.0, 2.0);
        const auto base = graph::gnn_forward(model, input);
        std::shuffle(perm.begin(), perm.end(), rng);
        graph::Model permuted = model;
        permuted.graph = graph::permute_graph(g, perm);
        Tensor pin(input.shape());
        for (std::size_t t = 0; t < 7; ++t)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t c = 0; c < 7; ++c) pin.at(t, k, c) = input.at(t, perm[k], c);
        const auto out = graph::gnn_forward(permuted, pin);
        const std::size_t width = out.size() / n;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t q = 0; q < width; ++q)
                if (out[k * width + q] != base[perm[k] * width + q]) ++mismatches;
    }
    return {mismatches == 0, "100 permutations of 6 regions, " + std::to_string(mismatches) + " non-identical entries"};
}

Outcome metric_oracles() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_int_distribution<std::size_t> len(1, 64);
    std::bernoulli_distribution keep(0.85);
    double worst = 0.0;
    std::size_t order_violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = len(rng);
        std::vector<double> p(n), a(n);
        std::vector<bool> m(n);
        for (std::size_t k = 0; k < n; ++k) {
            p[k] = u(rng);
            a[k] = u(rng);
            m[k] = keep(rng);
        }
        m[trial % n] = true;
        double abs_sum = 0.0, sq_sum = 0.0, count = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (m[k]) {
                abs_sum += std::abs(p[k] - a[k]);
                sq_sum += (p[k] - a[k]) * (p[k] - a[k]);
                count += 1.0;
            }
        const double e1 = train::mae(p, a, m);
        const double e2 = train::rmse(p, a, m);
        worst = std::max({worst, std::abs(e1 - abs_sum / count), std::abs(e2 - std::sqrt(sq_sum / count))});
        if (e2 < e1 * (1.0 - 1e-15)) ++order_violations;
    }
    return {worst <= 1e-12 && order_violations == 0,
            "10000 vectors, max deviation " + fmt("%.1e", worst) + ", RMSE < MAE in " +
                std::to_string(order_violations)};
}

Outcome weight_contracts() {
    const adapt::AdaptConfig c;
    std::size_t violations = 0;
    adapt::TemporalWeights prev = adapt::temporal_weights(1, c);
    const std::vector<graph::Region> regions{{0, 0, 0}, {1, 100, 0}, {2, 0, 100}, {3, 100, 100}, {4, 50, 50}};
    const auto spatial = adapt::spatial_weights(regions, c);
    for (int t = 1; t <= 7; ++t) {
        const auto w = adapt::temporal_weights(t, c);
        if (!(w.short_term >= 0.0 && w.short_term <= 1.0 && w.long_term >= 0.0 && w.long_term <= 1.0)) ++violations;
        if (w.short_term > prev.short_term || w.long_term < prev.long_term) ++violations;
        prev = w;
        for (std::size_t i = 0; i < regions.size(); ++i) {
            if (adapt::combined_weight(t, i, c, spatial) != spatial[i] * (w.short_term + w.long_term)) ++violations;
        }
    }
    return {violations == 0, "horizons 1-7, " + std::to_string(violations) + " violations"};
}

const data::DatasetSplit& benchmark_split() {
    static const auto split = data::make_split(data::synthesize(data::SynthSpec{}));
    return split;
}

double loss_at_best(const train::TrainingLog& log) {
    for (const auto& e : log.epochs)
        if (e.phase == "train" && e.epoch == log.best_epoch) return e.loss.total;
    return log.initial_loss.total;
}

Outcome end_to_end_descent() {
    const auto r = train::train(benchmark_split(), train::variant('g'), train::benchmark_config());
    const double start = r.log.initial_loss.total;
    const double best = loss_at_best(r.log);
    const double drop = 1.0 - best / start;
    return {drop >= 0.5, "total loss " + fmt("%.4f", start) + " -> " + fmt("%.4f", best) + " at epoch " +
                             std::to_string(r.log.best_epoch) + ", reduction " + fmt("%.1f%%", 100.0 * drop) +
                             " (need >= 50%)"};
}

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[1];
}

Outcome ablation_direction() {
    const std::vector<char> tags{'a', 'b', 'd', 'g'};
    std::vector<std::vector<double>> scores(tags.size());
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        auto config = train::benchmark_config();
        config.seed = seed;
        for (std::size_t k = 0; k < tags.size(); ++k) {
            const auto r = train::train(benchmark_split(), train::variant(tags[k]), config);
            const auto row = train::evaluate_row(r.trained, benchmark_split().raw, benchmark_split().test, "");
            scores[k].push_back(row.cells[0][data::index(data::Variable::Temperature)].mae);
        }
    }
    const double a = median3(scores[0]), b = median3(scores[1]), d = median3(scores[2]), g = median3(scores[3]);
    std::string detail = "median 24h temperature MAE a " + fmt("%.3f", a) + ", b " + fmt("%.3f", b) + ", d " +
                         fmt("%.3f", d) + ", g " + fmt("%.3f", g) + " (need g < b < a, g <= d)";
    return {g < b && b < a && g <= d, detail};
}

int run_cli(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd '" + dir.string() + "' && '" STSSL_CLI_PATH "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / ("stssl_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string conf = "--config '" STSSL_SOURCE_DIR "/configs/benchmark.conf' ";
    bool ok = true;
    for (const char* run : {"one", "two"}) {
        ok = ok && run_cli(dir, "train " + conf + "--variant g --output-dir " + run) == 0;
        ok = ok && run_cli(dir, "eval " + conf + "--model " + run + "/model.json --output-dir " + run) == 0;
    }
    Outcome o;
    if (!ok) {
        o.detail = "a train or eval command failed";
    } else {
        const bool model = slurp(dir / "one/model.json") == slurp(dir / "two/model.json");
        const bool json = slurp(dir / "one/metrics.json") == slurp(dir / "two/metrics.json");
        const bool csv = slurp(dir / "one/metrics.csv") == slurp(dir / "two/metrics.csv");
        o.pass = model && json && csv;
        o.detail = std::string("model files ") + (model ? "identical" : "differ") + ", metric tables " +
                   (json && csv ? "identical" : "differ");
    }
    fs::remove_all(dir);
    return o;
}

Outcome round_trips() {
    std::mt19937_64 rng(909);
    data::SynthSpec spec;
    spec.missing_rate = 0.03;
    const auto series = data::synthesize(spec);
    const auto stats = data::compute_stats(series, 300);
    const auto back = data::denormalize(data::normalize(series, stats), stats);
    double norm_err = 0.0;
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        if (!series.valid[k]) continue;
        double d = std::abs(back.values[k] - series.values[k]);
        if (k % data::kVariables == data::index(data::Variable::WindAngle)) d = std::min(d, 360.0 - d);
        norm_err = std::max(norm_err, d);
    }
    std::uniform_real_distribution<double> deg(0.0, 360.0);
    double angle_err = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double a = deg(rng);
        const auto [s, c] = data::encode_wind_angle(a);
        const double d = std::abs(data::decode_wind_angle(s, c) - a);
        angle_err = std::max(angle_err, std::min(d, 360.0 - d));
    }
    const auto dir = fs::temp_directory_path() / ("stssl_roundtrip_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    data::write_series(series, dir / "grid.csv");
    const bool csv_exact = data::ingest(dir / "grid.csv") == series;
    fs::remove_all(dir);
    return {norm_err <= 1e-9 && angle_err <= 1e-9 && csv_exact,
            "normalize max error " + fmt("%.1e", norm_err) + ", wind angle " + fmt("%.1e", angle_err) +
                ", CSV ingest " + (csv_exact ? "exact" : "differs")};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"gradient suite", 10.0, gradient_suite},
        {"attention and adjacency invariants", 10.0, graph_invariants},
        {"permutation equivariance", 0.0, permutation_equivariance},
        {"metric oracles", 0.0, metric_oracles},
        {"weight contracts", 0.0, weight_contracts},
        {"end-to-end descent", 300.0, end_to_end_descent},
        {"ablation direction", 1800.0, ablation_direction},
        {"determinism", 0.0, determinism},
        {"round trips", 0.0, round_trips},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
            o.pass = false;
            o.detail += ", over the " + fmt("%.0f", c.time_limit_s) + " s budget";
        }
        std::printf("[%s] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
