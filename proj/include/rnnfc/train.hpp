#pragma once

#include "rnnfc/checkpoint.hpp"
#include "rnnfc/data.hpp"
#include "rnnfc/network.hpp"
#include "rnnfc/optim.hpp"
#include "rnnfc/preprocess.hpp"
#include "rnnfc/smbo.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rnnfc {

struct Hyperparameters {
    int minibatch_size = 10;
    int epochs = 5;
    int epoch_size = 5;
    std::optional<double> learning_rate;  // Adam/Adagrad only
    double noise_sigma = 0.01;
    double l2_psi = 1e-4;
    std::optional<int> cell_dim;
    std::optional<int> param_budget;
    int layers = 1;
    double init_sigma = 1e-4;
};

struct ModelConfig {
    Architecture architecture = Architecture::StackedMW;
    CellKind cell = CellKind::LstmPeephole;
    OptimizerKind optimizer = OptimizerKind::Cocob;
    Pipeline pipeline = Pipeline::Stl;
    WindowVariant input_window_variant = WindowVariant::Small;
    Hyperparameters hyper;

    /// Structural checks: exactly one of cell_dim / param_budget, learning rate present iff
    /// the optimizer needs one, positive counts.
    void validate() const;
};

struct IntRange {
    int lo = 0;
    int hi = 0;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct HyperparameterSpace {
    IntRange minibatch_size{10, 30};
    IntRange epochs{3, 25};
    IntRange epoch_size{5, 20};
    RealRange noise_sigma{0.01, 0.08};
    RealRange l2_psi{0.0001, 0.0008};
    std::optional<IntRange> cell_dim = IntRange{20, 50};
    std::optional<IntRange> param_budget;
    IntRange layers{1, 2};
    RealRange init_sigma{0.0001, 0.0008};
    std::optional<RealRange> learning_rate;

    /// Monthly-data ranges with the minibatch range scaled to about a tenth of the collection,
    /// and the learning-rate range of the optimizer (none for COCOB).
    static HyperparameterSpace defaults(std::size_t series_count, OptimizerKind optimizer);

    void validate() const;
    bool contains(const Hyperparameters& h) const;
    std::vector<Dimension> dimensions() const;
    Hyperparameters at(const std::vector<double>& point) const;
};

/// Input window size m for the config (1 for scalar-input architectures).
int resolve_input_window(const SeriesCollection& collection, const ModelConfig& config);

/// The common horizon of the collection; ContractError when series disagree.
int common_horizon(const SeriesCollection& collection);

/// Preprocessed windows of every series for one stage. When `cache_dir` is set, cached
/// sets are reused and missing ones written.
std::vector<WindowSet> build_stage_windows(const SeriesCollection& collection, const ModelConfig& config, Stage stage,
                                           int m, const std::optional<std::filesystem::path>& cache_dir = {});

NetworkSpec network_spec(const ModelConfig& config, int m, int horizon);

struct TrainResult {
    Network network;
    /// Mean minibatch loss of every traversal, in order.
    std::vector<double> traversal_losses;
    Checkpoint checkpoint;
};

/// epochs x epoch_size traversals; one optimizer step per minibatch on the mean regularized loss.
TrainResult train_model(const ModelConfig& config, const std::vector<WindowSet>& windows, std::uint64_t seed);

using Forecaster = std::function<std::vector<double>(const WindowSet&)>;

/// Post-processed forecasts from the final block of each set.
std::vector<std::vector<double>> forecast_collection(const SeriesCollection& collection,
                                                     const std::vector<WindowSet>& windows,
                                                     const Forecaster& forecaster);

/// Mean modified SMAPE of post-processed validation forecasts against the held-out values.
double score_validation(const SeriesCollection& collection, const std::vector<WindowSet>& validation,
                        const Forecaster& forecaster);

double validate(const Network& network, const SeriesCollection& collection, const std::vector<WindowSet>& validation);

/// train_model on the train windows + validate, with one seed.
double evaluate_config(const ModelConfig& config, const SeriesCollection& collection, std::uint64_t seed);

struct TuneTrial {
    Hyperparameters hyper;
    double validation_smape = 0.0;
    bool failed = false;
    std::string failure;
    double seconds = 0.0;
};

struct TuneResult {
    ModelConfig best_config;
    double best_smape = 0.0;
    std::vector<TuneTrial> trials;
    std::size_t iterations = 0;
};

inline constexpr std::size_t kDefaultTuneIterations = 50;

/// SMBO over `space`; architecture, cell, optimizer, pipeline and window variant come from `fixed`.
TuneResult tune(const HyperparameterSpace& space, const ModelConfig& fixed, const SeriesCollection& collection,
                std::size_t iterations, std::uint64_t seed, int jobs = 1);

struct EnsembleResult {
    std::vector<std::string> ids;
    std::vector<std::uint64_t> seeds;
    /// [seed][series] post-processed H-vectors.
    std::vector<std::vector<std::vector<double>>> per_seed;
    /// [series] elementwise median across seeds.
    std::vector<std::vector<double>> ensemble;
};

/// Elementwise median of several forecasts of equal shape.
std::vector<std::vector<double>> median_ensemble(const std::vector<std::vector<std::vector<double>>>& per_seed);

/// Retrains on every full series once per seed and forecasts the H values after the end.
EnsembleResult ensemble_forecast(const ModelConfig& config, const SeriesCollection& collection,
                                 const std::vector<std::uint64_t>& seeds, int jobs = 1);

} // namespace rnnfc
