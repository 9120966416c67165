#include "rnnfc/error.hpp"
#include "rnnfc/metrics.hpp"
#include "rnnfc/seed.hpp"
#include "rnnfc/smbo.hpp"
#include "rnnfc/train.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace rnnfc;

namespace {

SeriesCollection sine_collection(std::size_t count, std::uint64_t seed, std::size_t length = 60, int horizon = 6) {
    SeriesCollection c;
    c.name = "sines";
    c.horizon = horizon;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(1.0, 5.0), phase(0.0, 2 * M_PI);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (std::size_t i = 0; i < count; ++i) {
        TimeSeries s;
        s.id = "s" + std::to_string(i);
        s.period = 12;
        s.horizon = horizon;
        const double a = amp(rng), p = phase(rng);
        for (std::size_t t = 0; t < length; ++t) {
            s.values.push_back(20.0 + a * std::sin(2 * M_PI * t / 12.0 + p) + noise(rng));
        }
        c.series.push_back(s);
    }
    return c;
}

ModelConfig small_config() {
    ModelConfig c;
    c.architecture = Architecture::StackedMW;
    c.cell = CellKind::LstmPeephole;
    c.hyper.cell_dim = 4;
    c.hyper.minibatch_size = 4;
    c.hyper.epochs = 1;
    c.hyper.epoch_size = 1;
    return c;
}

std::vector<WindowSet> windows(const SeriesCollection& c, const ModelConfig& cfg, Stage stage) {
    return build_stage_windows(c, cfg, stage, resolve_input_window(c, cfg));
}

// Independent reference for the modified SMAPE with the /2 denominator.
double smape_mod_ref(const std::vector<double>& f, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        s += 2.0 * std::abs(f[k] - y[k]) / std::max(std::abs(f[k]) + std::abs(y[k]) + 0.1, 0.6);
    }
    return 100.0 * s / static_cast<double>(f.size());
}

} // namespace

TEST_CASE("zero epochs returns the seeded initialization") {
    auto c = sine_collection(6, 1);
    auto cfg = small_config();
    cfg.hyper.epochs = 0;
    auto r = train_model(cfg, windows(c, cfg, Stage::Train), 42);
    Network fresh(network_spec(cfg, resolve_input_window(c, cfg), 6));
    fresh.initialize(cfg.hyper.init_sigma, derive_seed(42, kStreamInit));
    CHECK(r.network.parameters().flat_values() == fresh.parameters().flat_values());
    CHECK(r.traversal_losses.empty());
}

TEST_CASE("training is deterministic for a seed") {
    auto c = sine_collection(8, 2);
    auto cfg = small_config();
    cfg.hyper.epochs = 2;
    auto w = windows(c, cfg, Stage::Train);
    auto a = train_model(cfg, w, 5);
    auto b = train_model(cfg, w, 5);
    CHECK(a.network.parameters().flat_values() == b.network.parameters().flat_values());
    CHECK(a.traversal_losses == b.traversal_losses);
    CHECK(a.checkpoint == b.checkpoint);
    auto other = train_model(cfg, w, 6);
    CHECK(other.network.parameters().flat_values() != a.network.parameters().flat_values());
}

TEST_CASE("longer training lowers the training loss") {
    auto c = sine_collection(20, 3);
    auto cfg = small_config();
    cfg.hyper.epochs = 10;
    cfg.hyper.epoch_size = 2;
    auto r = train_model(cfg, windows(c, cfg, Stage::Train), 9);
    REQUIRE(r.traversal_losses.size() == 20);
    CHECK(r.traversal_losses.back() < r.traversal_losses.front());
}

TEST_CASE("validation scoring: perfect and seasonal-naive forecasters") {
    auto c = sine_collection(5, 4);
    for (auto pipeline : {Pipeline::Stl, Pipeline::NoStl}) {
        INFO(to_string(pipeline));
        auto cfg = small_config();
        cfg.pipeline = pipeline;
        auto val = windows(c, cfg, Stage::Validation);
        auto lookup = [&](const std::string& id) -> const TimeSeries& { return *c.find(id); };

        auto perfect = [&](const WindowSet& ws) {
            const auto& s = lookup(ws.series_id);
            std::vector<double> future(s.values.end() - 6, s.values.end());
            return normalize_future(future, ws.blocks.back().record);
        };
        CHECK(score_validation(c, val, perfect) == Catch::Approx(0.0).margin(1e-8));

        auto snaive_raw = [&](const TimeSeries& s) {
            const std::size_t train_len = s.values.size() - 6;
            std::vector<double> f;
            for (std::size_t k = 0; k < 6; ++k) {
                f.push_back(s.values[train_len - 12 + k % 12]);
            }
            return f;
        };
        auto snaive = [&](const WindowSet& ws) {
            return normalize_future(snaive_raw(lookup(ws.series_id)), ws.blocks.back().record);
        };
        double expected = 0;
        for (const auto& s : c.series) {
            expected += smape_mod_ref(snaive_raw(s), std::vector<double>(s.values.end() - 6, s.values.end()));
        }
        expected /= static_cast<double>(c.size());
        CHECK(score_validation(c, val, snaive) == Catch::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("hyperparameter space: defaults, dimensions, membership") {
    auto s = HyperparameterSpace::defaults(200, OptimizerKind::Cocob);
    CHECK(s.minibatch_size.lo == 20);
    CHECK(s.minibatch_size.hi == 60);
    CHECK_FALSE(s.learning_rate);
    CHECK(s.dimensions().size() == 8);
    auto adam = HyperparameterSpace::defaults(200, OptimizerKind::Adam);
    REQUIRE(adam.learning_rate);
    CHECK(adam.dimensions().back().log_scale);
    std::vector<double> mid;
    for (const auto& d : adam.dimensions()) {
        mid.push_back(d.integer ? std::round((d.lo + d.hi) / 2) : (d.lo + d.hi) / 2);
    }
    CHECK(adam.contains(adam.at(mid)));
    HyperparameterSpace bad;
    bad.epochs = {5, 3};
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("SMBO finds the minimum of a one-dimensional quadratic") {
    std::vector<Dimension> space{{"x", 0.0, 1.0}};
    auto r = smbo_minimize(space, [](const std::vector<double>& p, std::size_t) { return std::pow(p[0] - 0.5, 2); },
                           50, 7);
    CHECK(r.trials.size() == 50);
    CHECK(std::abs(r.best_trial().point[0] - 0.5) < 0.1);
    auto par = smbo_minimize(space, [](const std::vector<double>& p, std::size_t) { return std::pow(p[0] - 0.5, 2); },
                             50, 7, 4);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(par.trials[i].point == r.trials[i].point);
    }
}

TEST_CASE("SMBO: constant objective, failures, all-failed") {
    std::vector<Dimension> space{{"a", 1, 5, true}, {"b", 1e-3, 1e-1, false, true}};
    auto r = smbo_minimize(space, [](const std::vector<double>&, std::size_t) { return 1.0; }, 20, 1);
    CHECK(r.trials.size() == 20);
    for (const auto& t : r.trials) {
        CHECK(t.point[0] == std::round(t.point[0]));
        CHECK(t.point[1] >= 1e-3);
        CHECK(t.point[1] <= 1e-1);
    }
    auto some = smbo_minimize(space,
                              [](const std::vector<double>& p, std::size_t) {
                                  if (p[0] > 3) {
                                      throw NumericError("diverged");
                                  }
                                  return p[0];
                              },
                              20, 2);
    CHECK_FALSE(some.best_trial().failed);
    CHECK_THROWS_AS(smbo_minimize(space, [](const std::vector<double>&, std::size_t) -> double {
        throw NumericError("always");
    }, 5, 1), TuningError);
    CHECK(smbo_initial_trials(50) == 10);
    CHECK(smbo_initial_trials(1) == 1);
    CHECK(smbo_initial_trials(200) == 40);
}

TEST_CASE("tune returns a config inside the space") {
    auto c = sine_collection(6, 5);
    HyperparameterSpace space;
    space.minibatch_size = {2, 4};
    space.epochs = {1, 2};
    space.epoch_size = {1, 2};
    space.cell_dim = IntRange{2, 4};
    space.layers = {1, 1};
    auto fixed = small_config();
    auto one = tune(space, fixed, c, 1, 3);
    CHECK(one.trials.size() == 1);
    auto r = tune(space, fixed, c, 4, 3);
    CHECK(r.trials.size() == 4);
    CHECK(space.contains(r.best_config.hyper));
    CHECK(r.best_config.architecture == fixed.architecture);
    double best = r.trials.front().validation_smape;
    for (const auto& t : r.trials) {
        best = std::min(best, t.validation_smape);
    }
    CHECK(r.best_smape == best);
    space.learning_rate = RealRange{0.01, 0.1};
    CHECK_THROWS_AS(tune(space, fixed, c, 2, 3), ContractError);
}

TEST_CASE("median ensemble") {
    std::vector<std::vector<std::vector<double>>> per{{{1, 5}}, {{2, 4}}, {{9, 3}}};
    CHECK(median_ensemble(per) == std::vector<std::vector<double>>{{2, 4}});
    std::vector<std::vector<std::vector<double>>> perm{per[2], per[0], per[1]};
    CHECK(median_ensemble(perm) == median_ensemble(per));
    CHECK(median_ensemble({per[1]}) == per[1]);
    CHECK_THROWS_AS(median_ensemble({}), ContractError);
}

TEST_CASE("ensemble forecast: single seed and thread-count invariance") {
    auto c = sine_collection(5, 6);
    auto cfg = small_config();
    auto one = ensemble_forecast(cfg, c, {11});
    CHECK(one.ensemble == one.per_seed[0]);
    REQUIRE(one.ensemble.size() == 5);
    CHECK(one.ensemble[0].size() == 6);
    auto serial = ensemble_forecast(cfg, c, {1, 2, 3}, 1);
    auto parallel = ensemble_forecast(cfg, c, {1, 2, 3}, 3);
    CHECK(serial.ensemble == parallel.ensemble);
}

TEST_CASE("mixed horizons are rejected") {
    auto c = sine_collection(3, 7);
    c.series[1].horizon = 5;
    CHECK_THROWS_AS(common_horizon(c), ContractError);
}
