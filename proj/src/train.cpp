#include "rnnfc/train.hpp"

#include "rnnfc/error.hpp"
#include "rnnfc/metrics.hpp"
#include "rnnfc/parallel.hpp"
#include "rnnfc/seed.hpp"
#include "rnnfc/window_cache.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rnnfc {

using grad::Tape;
using grad::Var;

void ModelConfig::validate() const {
    const auto& h = hyper;
    if (h.cell_dim.has_value() == h.param_budget.has_value()) {
        throw ContractError("config needs exactly one of cell_dim and param_budget");
    }
    const bool needs_lr = optimizer != OptimizerKind::Cocob;
    if (needs_lr && !h.learning_rate) {
        throw ContractError(to_string(optimizer) + " requires a learning rate");
    }
    if (!needs_lr && h.learning_rate) {
        throw ContractError("cocob takes no learning rate");
    }
    if (h.minibatch_size < 1 || h.epochs < 0 || h.epoch_size < 1 || h.layers < 1) {
        throw ContractError("config: minibatch_size, epoch_size and layers must be >= 1, epochs >= 0");
    }
    if ((h.cell_dim && *h.cell_dim < 1) || (h.param_budget && *h.param_budget < 1)) {
        throw ContractError("config: cell_dim / param_budget must be >= 1");
    }
    if (!(h.noise_sigma >= 0.0) || !(h.l2_psi >= 0.0) || !(h.init_sigma >= 0.0)) {
        throw ContractError("config: noise_sigma, l2_psi and init_sigma must be >= 0");
    }
}

HyperparameterSpace HyperparameterSpace::defaults(std::size_t series_count, OptimizerKind optimizer) {
    HyperparameterSpace s;
    const int lo = std::max(1, static_cast<int>(std::lround(static_cast<double>(series_count) / 10.0)));
    s.minibatch_size = {lo, std::max(lo, 3 * lo)};
    if (optimizer == OptimizerKind::Adam) {
        s.learning_rate = RealRange{0.001, 0.1};
    } else if (optimizer == OptimizerKind::Adagrad) {
        s.learning_rate = RealRange{0.01, 0.9};
    }
    return s;
}

void HyperparameterSpace::validate() const {
    auto check = [](const char* name, double lo, double hi) {
        if (!(lo <= hi)) {
            throw ContractError(std::string("hyperparameter space: ") + name + " has lower > upper");
        }
    };
    check("minibatch_size", minibatch_size.lo, minibatch_size.hi);
    check("epochs", epochs.lo, epochs.hi);
    check("epoch_size", epoch_size.lo, epoch_size.hi);
    check("noise_sigma", noise_sigma.lo, noise_sigma.hi);
    check("l2_psi", l2_psi.lo, l2_psi.hi);
    check("layers", layers.lo, layers.hi);
    check("init_sigma", init_sigma.lo, init_sigma.hi);
    if (cell_dim.has_value() == param_budget.has_value()) {
        throw ContractError("hyperparameter space needs exactly one of cell_dim and param_budget");
    }
    if (cell_dim) {
        check("cell_dim", cell_dim->lo, cell_dim->hi);
    }
    if (param_budget) {
        check("param_budget", param_budget->lo, param_budget->hi);
    }
    if (learning_rate) {
        check("learning_rate", learning_rate->lo, learning_rate->hi);
        if (learning_rate->lo <= 0.0) {
            throw ContractError("hyperparameter space: learning_rate lower bound must be > 0");
        }
    }
    if (minibatch_size.lo < 1 || epoch_size.lo < 1 || layers.lo < 1 || epochs.lo < 0) {
        throw ContractError("hyperparameter space: counts must be >= 1 (epochs >= 0)");
    }
}

bool HyperparameterSpace::contains(const Hyperparameters& h) const {
    auto in = [](auto v, auto r) { return v >= r.lo && v <= r.hi; };
    bool ok = in(h.minibatch_size, minibatch_size) && in(h.epochs, epochs) && in(h.epoch_size, epoch_size) &&
              in(h.noise_sigma, noise_sigma) && in(h.l2_psi, l2_psi) && in(h.layers, layers) &&
              in(h.init_sigma, init_sigma);
    ok = ok && (cell_dim ? h.cell_dim && in(*h.cell_dim, *cell_dim) : !h.cell_dim);
    ok = ok && (param_budget ? h.param_budget && in(*h.param_budget, *param_budget) : !h.param_budget);
    ok = ok && (learning_rate ? h.learning_rate && in(*h.learning_rate, *learning_rate) : !h.learning_rate);
    return ok;
}

std::vector<Dimension> HyperparameterSpace::dimensions() const {
    auto integer = [](const char* name, IntRange r) {
        return Dimension{name, static_cast<double>(r.lo), static_cast<double>(r.hi), true, false};
    };
    auto real = [](const char* name, RealRange r, bool log = false) { return Dimension{name, r.lo, r.hi, false, log}; };
    std::vector<Dimension> dims{integer("minibatch_size", minibatch_size),
                                integer("epochs", epochs),
                                integer("epoch_size", epoch_size),
                                real("noise_sigma", noise_sigma),
                                real("l2_psi", l2_psi),
                                cell_dim ? integer("cell_dim", *cell_dim) : integer("param_budget", *param_budget),
                                integer("layers", layers),
                                real("init_sigma", init_sigma)};
    if (learning_rate) {
        dims.push_back(real("learning_rate", *learning_rate, true));
    }
    return dims;
}

Hyperparameters HyperparameterSpace::at(const std::vector<double>& p) const {
    Hyperparameters h;
    h.minibatch_size = static_cast<int>(p.at(0));
    h.epochs = static_cast<int>(p.at(1));
    h.epoch_size = static_cast<int>(p.at(2));
    h.noise_sigma = p.at(3);
    h.l2_psi = p.at(4);
    if (cell_dim) {
        h.cell_dim = static_cast<int>(p.at(5));
    } else {
        h.param_budget = static_cast<int>(p.at(5));
    }
    h.layers = static_cast<int>(p.at(6));
    h.init_sigma = p.at(7);
    if (learning_rate) {
        h.learning_rate = p.at(8);
    }
    return h;
}

int common_horizon(const SeriesCollection& collection) {
    if (collection.series.empty()) {
        throw ContractError("collection '" + collection.name + "' has no series");
    }
    const int h = collection.series.front().horizon;
    for (const auto& s : collection.series) {
        if (s.horizon != h) {
            throw ContractError("collection '" + collection.name + "' mixes horizons " + std::to_string(h) + " and " +
                                std::to_string(s.horizon) + "; a global model needs one horizon (split the collection)");
        }
    }
    return h;
}

int resolve_input_window(const SeriesCollection& collection, const ModelConfig& config) {
    const int h = common_horizon(collection);
    if (input_format(config.architecture) == InputFormat::Sequence) {
        return 1;
    }
    std::size_t shortest = collection.series.front().values.size();
    for (const auto& s : collection.series) {
        shortest = std::min(shortest, s.values.size());
    }
    return choose_input_window_size(h, collection.series.front().period, shortest, config.input_window_variant);
}

std::vector<WindowSet> build_stage_windows(const SeriesCollection& collection, const ModelConfig& config, Stage stage,
                                           int m, const std::optional<std::filesystem::path>& cache_dir) {
    const int n = common_horizon(collection);
    const InputFormat format = input_format(config.architecture);
    const int key_m = format == InputFormat::Sequence ? 0 : m;
    WindowCacheKey key{collection.name, config.pipeline, key_m, n, stage, format};
    std::vector<WindowSet> out;
    out.reserve(collection.size());
    for (const auto& s : collection.series) {
        if (cache_dir) {
            const auto path = window_cache_path(*cache_dir, key, s.id);
            if (std::filesystem::exists(path)) {
                out.push_back(read_window_cache(path, key));
                continue;
            }
            out.push_back(preprocess_series(s, config.pipeline, m, n, stage, format));
            write_window_cache(path, key, out.back());
        } else {
            out.push_back(preprocess_series(s, config.pipeline, m, n, stage, format));
        }
    }
    return out;
}

NetworkSpec network_spec(const ModelConfig& config, int m, int horizon) {
    config.validate();
    NetworkSpec spec;
    spec.architecture = config.architecture;
    spec.cell = config.cell;
    spec.input_size = input_format(config.architecture) == InputFormat::Sequence ? 1 : m;
    spec.layers = config.hyper.layers;
    spec.horizon = horizon;
    spec.cell_dim = config.hyper.cell_dim ? *config.hyper.cell_dim
                                          : dim_from_param_budget(config.cell, spec.input_size, spec.layers,
                                                                  *config.hyper.param_budget);
    return spec;
}

TrainResult train_model(const ModelConfig& config, const std::vector<WindowSet>& windows, std::uint64_t seed) {
    config.validate();
    if (windows.empty()) {
        throw ContractError("train_model: no window sets");
    }
    const auto& h = config.hyper;
    Network network(network_spec(config, windows.front().m, windows.front().n));
    network.initialize(h.init_sigma, derive_seed(seed, kStreamInit));
    auto optimizer = make_optimizer(config.optimizer, h.learning_rate);

    std::mt19937_64 shuffle_rng(derive_seed(seed, kStreamShuffle));
    std::mt19937_64 noise_rng(derive_seed(seed, kStreamNoise));
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);

    auto& params = network.parameters();
    const auto batch = static_cast<std::size_t>(h.minibatch_size);
    std::vector<double> losses;
    Tape tape;
    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        for (int pass = 0; pass < h.epoch_size; ++pass) {
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            double pass_loss = 0.0;
            std::size_t batches = 0;
            for (std::size_t start = 0; start < order.size(); start += batch) {
                const std::size_t end = std::min(order.size(), start + batch);
                const double weight = 1.0 / static_cast<double>(end - start);
                try {
                    params.zero_grad();
                    double loss = 0.0;
                    for (std::size_t k = start; k < end; ++k) {
                        tape.clear();
                        Var e = tape.scale(network.training_error(tape, windows[order[k]], h.noise_sigma, noise_rng),
                                           weight);
                        loss += tape.scalar(e);
                        tape.backward(e);
                    }
                    // The penalty is shared by every series, so the mean keeps it once.
                    tape.clear();
                    Var zero = tape.zeros(1);
                    Var reg = regularized_loss(tape, tape.sum(zero), params, h.l2_psi);
                    loss += tape.scalar(reg);
                    if (h.l2_psi != 0.0) {
                        tape.backward(reg);
                    }
                    optimizer->step(params);
                    pass_loss += loss;
                    ++batches;
                } catch (const NumericError& e) {
                    throw TrainingError("training diverged at epoch " + std::to_string(epoch + 1) + ", traversal " +
                                        std::to_string(pass + 1) + ", minibatch " + std::to_string(batches + 1) +
                                        ": " + e.what());
                }
            }
            losses.push_back(pass_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
        }
    }
    Checkpoint cp;
    cp.parameters = export_parameters(params);
    cp.optimizer_kind = to_string(config.optimizer);
    cp.optimizer_step = optimizer->steps();
    cp.optimizer_state = optimizer->export_state();
    return TrainResult{std::move(network), std::move(losses), std::move(cp)};
}

std::vector<std::vector<double>> forecast_collection(const SeriesCollection& collection,
                                                     const std::vector<WindowSet>& windows,
                                                     const Forecaster& forecaster) {
    if (windows.size() != collection.size()) {
        throw ContractError("forecast_collection: " + std::to_string(windows.size()) + " window sets for " +
                            std::to_string(collection.size()) + " series");
    }
    std::vector<std::vector<double>> out;
    out.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& s = collection.series[i];
        if (windows[i].series_id != s.id) {
            throw ContractError("forecast_collection: window set '" + windows[i].series_id + "' does not match series '" +
                                s.id + "'");
        }
        auto raw = forecaster(windows[i]);
        out.push_back(postprocess_forecast(raw, windows[i].blocks.back().record, s.integer_valued));
    }
    return out;
}

double score_validation(const SeriesCollection& collection, const std::vector<WindowSet>& validation,
                        const Forecaster& forecaster) {
    auto forecasts = forecast_collection(collection, validation, forecaster);
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const auto split = split_train_validation(collection.series[i]);
        total += smape_modified(forecasts[i], split.validation_target);
    }
    return total / static_cast<double>(forecasts.size());
}

double validate(const Network& network, const SeriesCollection& collection, const std::vector<WindowSet>& validation) {
    return score_validation(collection, validation, [&](const WindowSet& ws) { return network.forecast(ws); });
}

double evaluate_config(const ModelConfig& config, const SeriesCollection& collection, std::uint64_t seed) {
    const int m = resolve_input_window(collection, config);
    auto train = build_stage_windows(collection, config, Stage::Train, m);
    auto validation = build_stage_windows(collection, config, Stage::Validation, m);
    auto result = train_model(config, train, seed);
    return validate(result.network, collection, validation);
}

TuneResult tune(const HyperparameterSpace& space, const ModelConfig& fixed, const SeriesCollection& collection,
                std::size_t iterations, std::uint64_t seed, int jobs) {
    space.validate();
    if ((fixed.optimizer == OptimizerKind::Cocob) == space.learning_rate.has_value()) {
        throw ContractError("hyperparameter space: a learning-rate range is required for " + to_string(fixed.optimizer) +
                            " and forbidden for cocob");
    }
    const int m = resolve_input_window(collection, fixed);
    const auto train = build_stage_windows(collection, fixed, Stage::Train, m);
    const auto validation = build_stage_windows(collection, fixed, Stage::Validation, m);
    const std::uint64_t trial_seed = derive_seed(seed, kStreamTrial);

    auto objective = [&](const std::vector<double>& point, std::size_t) {
        ModelConfig config = fixed;
        config.hyper = space.at(point);
        auto result = train_model(config, train, trial_seed);
        return validate(result.network, collection, validation);
    };
    auto smbo = smbo_minimize(space.dimensions(), objective, iterations, derive_seed(seed, kStreamTune), jobs);

    TuneResult result;
    result.iterations = iterations;
    for (const auto& t : smbo.trials) {
        result.trials.push_back({space.at(t.point), t.value, t.failed, t.failure, t.seconds});
    }
    result.best_config = fixed;
    result.best_config.hyper = result.trials[smbo.best].hyper;
    result.best_smape = result.trials[smbo.best].validation_smape;
    return result;
}

std::vector<std::vector<double>> median_ensemble(const std::vector<std::vector<std::vector<double>>>& per_seed) {
    if (per_seed.empty()) {
        throw ContractError("ensemble needs at least one seed");
    }
    std::vector<std::vector<double>> out(per_seed.front().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t h = per_seed.front()[i].size();
        out[i].resize(h);
        for (std::size_t k = 0; k < h; ++k) {
            std::vector<double> column;
            for (const auto& seed : per_seed) {
                if (seed.size() != out.size() || seed[i].size() != h) {
                    throw ShapeError("ensemble: seed forecasts differ in shape");
                }
                column.push_back(seed[i][k]);
            }
            out[i][k] = median(std::move(column));
        }
    }
    return out;
}

EnsembleResult ensemble_forecast(const ModelConfig& config, const SeriesCollection& collection,
                                 const std::vector<std::uint64_t>& seeds, int jobs) {
    if (seeds.empty()) {
        throw ContractError("ensemble_forecast needs at least one seed");
    }
    const int m = resolve_input_window(collection, config);
    const auto refit = build_stage_windows(collection, config, Stage::Refit, m);
    const auto test = build_stage_windows(collection, config, Stage::Test, m);

    EnsembleResult result;
    result.seeds = seeds;
    for (const auto& s : collection.series) {
        result.ids.push_back(s.id);
    }
    result.per_seed = parallel_map(seeds.size(), jobs, [&](std::size_t i) {
        auto trained = train_model(config, refit, seeds[i]);
        return forecast_collection(collection, test, [&](const WindowSet& ws) { return trained.network.forecast(ws); });
    });
    result.ensemble = median_ensemble(result.per_seed);
    return result;
}

} // namespace rnnfc
