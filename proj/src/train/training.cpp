// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/train/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "stssl/error.hpp"
#include "stssl/numerics/optim.hpp"

namespace stssl::train {

using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

void validate(const TrainConfig& c) {
    if (!(c.learning_rate > 0.0)) throw ContractError("learning_rate must be positive");
    if (c.batch_size < 1) throw ContractError("batch_size must be at least 1");
    if (c.epochs < 0) throw ContractError("epochs must be nonnegative");
    if (!(c.weight_decay >= 0.0)) throw ContractError("weight_decay must be nonnegative");
    if (c.early_stop_patience < 1) throw ContractError("early_stop_patience must be at least 1");
    if (c.pretrain_epochs < 0) throw ContractError("pretrain_epochs must be nonnegative");
    if (c.eval_threads < 1) throw ContractError("eval_threads must be at least 1");
    if (!(c.sigma_spatial > 0.0)) throw ContractError("sigma_spatial must be positive");
    ssl::validate(c.loss_weights());
    graph::validate(c.gnn);
    adapt::validate(c.adapt_config());
}

TrainConfig benchmark_config() {
    TrainConfig c;
    c.learning_rate = 1.0;
    c.gnn.gamma_corr = 0.25;
    c.gnn.tau_edge = 0.9;
    return c;
}

std::string AblationVariant::name() const {
    switch (tag) {
    case 'a': return "recurrent base";
    case 'b': return "+ graph";
    case 'c': return "+ adaptation";
    case 'd': return "+ ssl pretraining";
    case 'e': return "+ contrastive";
    case 'f': return "+ consistency";
    default: return "full model";
    }
}

int AblationVariant::active_flags() const {
    return int(enable_gnn) | int(enable_adaptation) << 1 | int(enable_ssl_pretrain) << 2 | int(enable_contrastive) << 3 |
           int(enable_consistency) << 4;
}

AblationVariant variant(char tag) {
    if (tag < 'a' || tag > 'g') throw ContractError(std::string("unknown variant '") + tag + "', expected a-g");
    AblationVariant v;
    v.tag = tag;
    v.enable_gnn = tag >= 'b';
    v.enable_adaptation = tag >= 'c';
    v.enable_ssl_pretrain = tag >= 'd';
    v.enable_contrastive = tag >= 'e';
    v.enable_consistency = tag >= 'f';
    return v;
}

std::vector<AblationVariant> ablation_ladder() {
    std::vector<AblationVariant> out;
    for (char t = 'a'; t <= 'g'; ++t) out.push_back(variant(t));
    return out;
}

std::vector<EpochRecord> TrainingLog::phase(const std::string& name) const {
    std::vector<EpochRecord> out;
    for (const auto& e : epochs)
        if (e.phase == name) out.push_back(e);
    return out;
}

namespace {

nlohmann::ordered_json report_json(const ssl::LossReport& r) {
    return {{"prediction", r.prediction}, {"contrastive", r.contrastive}, {"consistency", r.consistency},
            {"total", r.total}};
}

} // namespace

std::string TrainingLog::to_json() const {
    nlohmann::ordered_json j;
    j["variant"] = std::string(1, variant);
    j["initial_loss"] = report_json(initial_loss);
    j["best_epoch"] = best_epoch;
    j["best_validation_mae"] = best_validation_mae;
    j["stopped_early"] = stopped_early;
    auto& arr = j["epochs"] = nlohmann::ordered_json::array();
    for (const auto& e : epochs) {
        arr.push_back({{"phase", e.phase}, {"epoch", e.epoch}, {"loss", report_json(e.loss)},
                       {"validation_mae", e.validation_mae}});
    }
    return j.dump(2) + "\n";
}

graph::RegionGraph build_graph(const data::DatasetSplit& split, const TrainConfig& config) {
    const Tensor a = graph::build_adjacency(split.raw.regions, split.train_history(), config.sigma_spatial,
                                            config.gnn.gamma_corr);
    return graph::make_graph(split.raw.regions, a, config.gnn.tau_edge);
}

graph::Model initial_model(const data::DatasetSplit& split, const AblationVariant& v, const TrainConfig& config) {
    auto gc = config.gnn;
    gc.enable_gnn = v.enable_gnn;
    return graph::init_model(gc, build_graph(split, config), config.seed);
}

namespace {

/// Rows of the region-major target block: row i holds horizon-major channels.
void append_targets(const data::SampleWindow& w, std::size_t n, std::size_t horizons, std::size_t channels,
                    std::vector<double>& values, std::vector<bool>& valid) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < horizons; ++h)
            for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t k = (h * n + i) * channels + c;
                values.push_back(w.target[k]);
                valid.push_back(w.target_valid[k]);
            }
}

/// Masked MSE restricted to entries selected by `keep`; constant 0 when the
/// selection holds no valid entry.
Var subset_mse(Tape& tape, Var pred, const Tensor& target, const std::vector<bool>& valid,
               const std::vector<bool>& keep) {
    std::vector<bool> mask(valid.size());
    bool any = false;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        mask[k] = valid[k] && keep[k];
        any = any || mask[k];
    }
    if (!any) return tape.constant(Tensor::scalar(0.0));
    return num::masked_mse(pred, target, mask);
}

} // namespace

BatchObjective batch_objective(Tape& tape, const graph::Bound& bound, const graph::Model& model,
                               const std::vector<const data::SampleWindow*>& batch, const ObjectiveTerms& terms,
                               const TrainConfig& config) {
    if (batch.empty()) throw ContractError("batch_objective: empty batch");
    const std::size_t n = model.graph.size();
    const auto horizons = static_cast<std::size_t>(model.config.horizons);
    const auto channels = static_cast<std::size_t>(model.config.channels);
    const std::size_t width = horizons * channels;

    std::vector<Var> forecasts, embeddings;
    std::vector<long> times;
    std::vector<double> target_values;
    std::vector<bool> valid;
    for (const auto* w : batch) {
        const auto f = graph::forward(tape, bound, model, w->input);
        forecasts.push_back(f.forecast);
        embeddings.push_back(f.embedding);
        times.push_back(static_cast<long>(w->anchor));
        append_targets(*w, n, horizons, channels, target_values, valid);
    }
    const Var pred = forecasts.size() == 1 ? forecasts[0] : num::concat_rows(forecasts);
    const Tensor target(Shape{batch.size() * n, width}, std::move(target_values));

    Var prediction;
    if (terms.adaptation) {
        const auto ac = config.adapt_config();
        const auto split = static_cast<std::size_t>(ac.h_split);
        std::vector<bool> short_keep(valid.size());
        for (std::size_t k = 0; k < valid.size(); ++k) short_keep[k] = (k % width) / channels < split;
        std::vector<bool> long_keep(short_keep.size());
        std::transform(short_keep.begin(), short_keep.end(), long_keep.begin(), [](bool b) { return !b; });
        const Var short_loss = subset_mse(tape, pred, target, valid, short_keep);
        const Var long_loss = subset_mse(tape, pred, target, valid, long_keep);

        std::vector<Var> region_losses;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<bool> keep(valid.size());
            for (std::size_t k = 0; k < valid.size(); ++k) keep[k] = (k / width) % n == i;
            region_losses.push_back(subset_mse(tape, pred, target, valid, keep));
        }
        std::vector<int> hs(horizons);
        std::iota(hs.begin(), hs.end(), 1);
        const auto spatial = adapt::spatial_weights(model.graph.regions, ac);
        prediction = adapt::adaptation_loss<Var>(hs, short_loss, long_loss, region_losses, spatial, ac);
    } else {
        prediction = num::masked_mse(pred, target, valid);
    }

    const auto weights = config.loss_weights();
    const bool need_rows = terms.contrastive || terms.consistency;
    const Var rows = need_rows ? (embeddings.size() == 1 ? embeddings[0] : num::concat_rows(embeddings)) : Var{};
    const Var contrastive = terms.contrastive
                                ? ssl::contrastive_loss(rows, ssl::similarity_pairs(times, model.graph, weights.delta_t))
                                : tape.constant(Tensor::scalar(0.0));
    const Var consistency = terms.consistency ? ssl::consistency_loss(rows, times, n, weights.delta_t)
                                              : tape.constant(Tensor::scalar(0.0));

    BatchObjective out;
    out.total = ssl::weighted_total(prediction, contrastive, consistency, weights);
    out.report = {prediction.item(), contrastive.item(), consistency.item(), out.total.item()};
    return out;
}

namespace {

/// Runs fn(k) for k in [0, count) over up to `threads` workers, each owning a
/// contiguous block. Results are written by index, so the merge order never
/// depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w * chunk; k < std::min(count, (w + 1) * chunk); ++k) fn(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

double validation_mae(const graph::Model& model, const std::vector<data::SampleWindow>& windows, int threads) {
    if (windows.empty()) throw ContractError("validation_mae: no windows");
    std::vector<double> sums(windows.size(), 0.0);
    std::vector<std::size_t> counts(windows.size(), 0);
    parallel_for(windows.size(), threads, [&](std::size_t k) {
        const auto& w = windows[k];
        const Tensor pred = graph::gnn_forward(model, w.input);  // n × H × C
        const std::size_t n = model.graph.size();
        const auto horizons = static_cast<std::size_t>(model.config.horizons);
        const auto channels = static_cast<std::size_t>(model.config.channels);
        for (std::size_t h = 0; h < horizons; ++h)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < channels; ++c) {
                    const std::size_t t = (h * n + i) * channels + c;
                    if (!w.target_valid[t]) continue;
                    sums[k] += std::abs(pred.at(i, h, c) - w.target[t]);
                    ++counts[k];
                }
    });
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        s += sums[k];
        count += counts[k];
    }
    if (count == 0) throw ContractError("validation_mae: no valid target entries");
    return s / static_cast<double>(count);
}

namespace {

struct Phase {
    std::string name;
    graph::Train trainable;
    ObjectiveTerms terms;
};

ssl::LossReport mean_report(const ssl::LossReport& sum, std::size_t batches) {
    const double inv = 1.0 / static_cast<double>(batches);
    return {sum.prediction * inv, sum.contrastive * inv, sum.consistency * inv, sum.total * inv};
}

void accumulate(ssl::LossReport& acc, const ssl::LossReport& r) {
    acc.prediction += r.prediction;
    acc.contrastive += r.contrastive;
    acc.consistency += r.consistency;
    acc.total += r.total;
}

std::vector<std::size_t> shuffled_order(std::size_t count, std::mt19937_64& rng) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with an explicit draw so the permutation does not depend
    // on the standard library's shuffle implementation.
    for (std::size_t k = count; k > 1; --k) {
        const std::size_t j = static_cast<std::size_t>(rng() % k);
        std::swap(order[k - 1], order[j]);
    }
    return order;
}

std::vector<const data::SampleWindow*> batch_at(const std::vector<data::SampleWindow>& windows,
                                                const std::vector<std::size_t>& order, std::size_t start,
                                                std::size_t size) {
    std::vector<const data::SampleWindow*> batch;
    for (std::size_t k = start; k < std::min(order.size(), start + size); ++k) batch.push_back(&windows[order[k]]);
    return batch;
}

/// Mean objective over the windows in file order, without updating anything.
ssl::LossReport measure(const graph::Model& model, const std::vector<data::SampleWindow>& windows,
                        const ObjectiveTerms& terms, const TrainConfig& config) {
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    const auto size = static_cast<std::size_t>(config.batch_size);
    ssl::LossReport acc;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += size, ++batches) {
        Tape tape(false);
        const auto bound = graph::bind_frozen(tape, model);
        accumulate(acc, batch_objective(tape, bound, model, batch_at(windows, order, start, size), terms, config).report);
    }
    return mean_report(acc, batches);
}

/// One pass over the training windows; returns the mean batch objective.
ssl::LossReport run_epoch(graph::Model& model, const std::vector<data::SampleWindow>& windows, const Phase& phase,
                          const TrainConfig& config, std::mt19937_64& rng, int epoch) {
    const auto order = shuffled_order(windows.size(), rng);
    const auto size = static_cast<std::size_t>(config.batch_size);
    // Frozen groups are skipped entirely, so weight decay cannot shrink them.
    std::vector<num::Parameter*> params;
    const auto take = [&](graph::ParameterGroup& g, graph::Train bit) {
        if (has(phase.trainable, bit))
            for (auto& p : g) params.push_back(&p);
    };
    take(model.encoder, graph::Train::Encoder);
    take(model.gnn, graph::Train::Gnn);
    take(model.readout, graph::Train::Readout);
    ssl::LossReport acc;
    std::size_t batches = 0;
    const std::string where = phase.name + " epoch " + std::to_string(epoch);
    for (std::size_t start = 0; start < order.size(); start += size, ++batches) {
        Tape tape;
        const auto bound = graph::bind(tape, model, phase.trainable);
        const auto obj = batch_objective(tape, bound, model, batch_at(windows, order, start, size), phase.terms, config);
        if (!std::isfinite(obj.report.total)) throw DivergenceError("non-finite loss in " + where);
        tape.backward(obj.total);
        try {
            num::sgd_step(params, config.learning_rate, config.weight_decay);
        } catch (const DivergenceError& e) {
            throw DivergenceError(where + ": " + e.what());
        }
        num::zero_gradients(params);
        accumulate(acc, obj.report);
    }
    return mean_report(acc, batches);
}

void require_windows(const data::DatasetSplit& split) {
    if (split.train.empty()) throw ContractError("training split is empty");
    if (split.validation.empty()) throw ContractError("validation split is empty");
}

} // namespace

void ssl_pretrain(graph::Model& model, const data::DatasetSplit& split, const TrainConfig& config, TrainingLog& log) {
    validate(config);
    require_windows(split);
    const Phase phase{"pretrain", graph::Train::Encoder | graph::Train::Gnn, {false, true, true}};
    std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
    for (int epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
        EpochRecord rec;
        rec.phase = phase.name;
        rec.epoch = epoch;
        rec.loss = run_epoch(model, split.train, phase, config, rng, epoch);
        rec.validation_mae = validation_mae(model, split.validation, config.eval_threads);
        log.epochs.push_back(rec);
    }
}

TrainResult train(const data::DatasetSplit& split, const AblationVariant& v, const TrainConfig& config) {
    validate(config);
    require_windows(split);
    graph::Model model = initial_model(split, v, config);
    TrainingLog log;
    log.variant = v.tag;
    const Phase phase{"train", graph::Train::All, {v.enable_adaptation, v.enable_contrastive, v.enable_consistency}};
    log.initial_loss = measure(model, split.train, phase.terms, config);
    if (v.enable_ssl_pretrain) ssl_pretrain(model, split, config, log);

    graph::Model best = model;
    double best_mae = std::numeric_limits<double>::infinity();
    int since_best = 0;
    std::mt19937_64 rng(config.seed);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochRecord rec;
        rec.phase = phase.name;
        rec.epoch = epoch;
        rec.loss = run_epoch(model, split.train, phase, config, rng, epoch);
        rec.validation_mae = validation_mae(model, split.validation, config.eval_threads);
        if (!std::isfinite(rec.validation_mae)) {
            throw DivergenceError("non-finite validation MAE in train epoch " + std::to_string(epoch));
        }
        log.epochs.push_back(rec);
        if (rec.validation_mae < best_mae) {
            best_mae = rec.validation_mae;
            best = model;
            log.best_epoch = epoch;
            log.best_validation_mae = best_mae;
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            log.stopped_early = true;
            break;
        }
    }
    return {TrainedModel{v.tag, std::move(best), split.stats}, std::move(log)};
}

std::vector<Tensor> predict(const TrainedModel& m, const std::vector<data::SampleWindow>& windows, int threads) {
    std::vector<Tensor> out(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t k) {
        out[k] = data::decode_channels(graph::gnn_forward(m.model, windows[k].input), m.stats);
    });
    return out;
}

std::pair<Tensor, std::vector<bool>> observed(const data::WeatherSeries& raw, const data::SampleWindow& w,
                                              std::size_t horizon) {
    if (horizon < 1 || horizon > kHorizonCount) throw ContractError("horizon must lie in 1..7");
    const std::size_t t = w.anchor + horizon;
    if (t >= raw.steps()) throw ContractError("window extends past the series");
    const std::size_t n = raw.region_count();
    Tensor values(Shape{n, data::kVariables}, 0.0);
    std::vector<bool> mask(n * data::kVariables);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t v = 0; v < data::kVariables; ++v) {
            values.at(i, v) = raw.values.at(t, i, v);
            mask[i * data::kVariables + v] = raw.is_valid(t, i, v);
        }
    return {values, mask};
}

MetricRow evaluate_row(const TrainedModel& m, const data::WeatherSeries& raw,
                       const std::vector<data::SampleWindow>& test, const std::string& label, int threads) {
    if (test.empty()) throw ContractError("evaluate: test split is empty");
    if (raw.region_count() != m.model.graph.size()) {
        throw IncompatibleError("model has " + std::to_string(m.model.graph.size()) + " regions, data has " +
                                std::to_string(raw.region_count()));
    }
    const auto preds = predict(m, test, threads);
    const std::size_t n = raw.region_count();
    const auto angle = data::index(data::Variable::WindAngle);
    MetricRow row;
    row.label = label;
    for (std::size_t h = 0; h < kHorizonCount; ++h) {
        std::vector<std::vector<double>> p(data::kVariables), a(data::kVariables);
        std::vector<std::vector<bool>> mask(data::kVariables);
        for (std::size_t k = 0; k < test.size(); ++k) {
            const auto [obs, valid] = observed(raw, test[k], h + 1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t v = 0; v < data::kVariables; ++v) {
                    const double pv = preds[k].at(i, h, v);
                    const double ov = obs.at(i, v);
                    if (v == angle) {
                        p[v].push_back(angular_error(pv, ov));
                        a[v].push_back(0.0);
                    } else {
                        p[v].push_back(pv);
                        a[v].push_back(ov);
                    }
                    mask[v].push_back(valid[i * data::kVariables + v]);
                }
        }
        for (std::size_t v = 0; v < data::kVariables; ++v) {
            row.cells[h][v] = {mae(p[v], a[v], mask[v]), rmse(p[v], a[v], mask[v])};
        }
    }
    return row;
}

MetricTable evaluate(const TrainedModel& m, const data::DatasetSplit& split, const std::string& label, int threads) {
    MetricTable table;
    table.add_row(evaluate_row(m, split.raw, split.test, label, threads));
    return table;
}

} // namespace stssl::train
