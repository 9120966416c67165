// rnnfc: command-line front end for the forecasting toolkit.

#include "rnnfc/baselines.hpp"
#include "rnnfc/config_io.hpp"
#include "rnnfc/data.hpp"
#include "rnnfc/error.hpp"
#include "rnnfc/metrics.hpp"
#include "rnnfc/seed.hpp"
#include "rnnfc/train.hpp"
#include "rnnfc/window_cache.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace rnnfc;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitContract = 3;
constexpr int kExitNumeric = 4;

struct Globals {
    std::uint64_t seed = 1;
    int jobs = 1;
    fs::path out = "out";
};

struct ModelFlags {
    std::string architecture = "STACKED_MW";
    std::string cell = "LSTM";
    std::string optimizer = "cocob";
    std::string pipeline = "STL";
    std::string window = "small";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--architecture", architecture, "STACKED_MW, S2S_DECODER_NMW, S2SD_DENSE_NMW, S2SD_DENSE_MW")
            ->capture_default_str();
        cmd->add_option("--cell", cell, "ERNN, LSTM or GRU")->capture_default_str();
        cmd->add_option("--optimizer", optimizer, "adam, adagrad or cocob")->capture_default_str();
        cmd->add_option("--pipeline", pipeline, "STL or NOSTL")->capture_default_str();
        cmd->add_option("--window", window, "input window variant: small or large")->capture_default_str();
    }

    ModelConfig fixed() const {
        ModelConfig c;
        c.architecture = parse_architecture(architecture);
        c.cell = parse_cell_kind(cell);
        c.optimizer = parse_optimizer_kind(optimizer);
        c.pipeline = parse_pipeline(pipeline);
        c.input_window_variant = parse_window_variant(window);
        return c;
    }
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    return out;
}

SeriesCollection load(const fs::path& manifest_path) {
    auto manifest = read_manifest(manifest_path);
    auto collection = load_manifest(manifest);
    for (const auto& s : collection.series) {
        if (s.has_missing()) {
            throw ImputationError("series '" + s.id +
                                  "' has missing values and the manifest sets no imputation policy");
        }
    }
    return collection;
}

fs::path cache_dir(const Globals& g) {
    if (const char* env = std::getenv("FORECAST_CACHE_DIR"); env && *env) {
        return env;
    }
    return g.out / "cache";
}

void cmd_preprocess(const Globals& g, const fs::path& manifest, const ModelFlags& flags,
                    const std::vector<std::string>& stages) {
    auto collection = load(manifest);
    ModelConfig config = flags.fixed();
    const int m = resolve_input_window(collection, config);
    const auto dir = cache_dir(g);
    const int n = common_horizon(collection);
    const auto format = input_format(config.architecture);
    std::cout << "series\tstage\tblocks\n";
    for (const auto& name : stages) {
        const Stage stage = parse_stage(name);
        WindowCacheKey key{collection.name, config.pipeline, format == InputFormat::Sequence ? 0 : m, n, stage, format};
        for (const auto& s : collection.series) {
            auto ws = preprocess_series(s, config.pipeline, m, n, stage, format);
            write_window_cache(window_cache_path(dir, key, s.id), key, ws);
            std::cout << s.id << '\t' << to_string(stage) << '\t' << ws.blocks.size() << '\n';
        }
    }
    std::cerr << "input window m=" << m << ", horizon n=" << n << ", cache " << dir.string() << '\n';
}

void cmd_tune(const Globals& g, const fs::path& manifest, const std::string& space_path, const ModelFlags& flags,
              std::size_t iterations) {
    auto collection = load(manifest);
    ModelConfig fixed = flags.fixed();
    HyperparameterSpace space = space_path.empty() ? HyperparameterSpace::defaults(collection.size(), fixed.optimizer)
                                                   : read_space(space_path);
    std::cerr << "tuning " << to_string(fixed.architecture) << '/' << to_string(fixed.cell) << '/'
              << to_string(fixed.optimizer) << '/' << to_string(fixed.pipeline) << " for " << iterations
              << " iterations\n";
    auto result = tune(space, fixed, collection, iterations, g.seed, g.jobs);
    fs::create_directories(g.out);
    auto trials = open_out(g.out / "trials.csv");
    write_trial_log(trials, result);
    write_config(g.out / "best_config.json", result.best_config);
    std::cerr << "best validation SMAPE " << format_double(result.best_smape) << '\n';
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ParseError("--seeds: '" + item + "' is not a non-negative integer");
        }
    }
    if (seeds.empty()) {
        throw ParseError("--seeds: empty list");
    }
    return seeds;
}

void cmd_forecast(const Globals& g, const fs::path& manifest, const fs::path& config_path, const std::string& seeds_text,
                  int num_seeds) {
    auto collection = load(manifest);
    ModelConfig config = read_config(config_path);
    std::vector<std::uint64_t> seeds;
    if (!seeds_text.empty()) {
        seeds = parse_seeds(seeds_text);
    } else {
        if (num_seeds < 1) {
            throw ParseError("--num-seeds must be >= 1");
        }
        for (int i = 0; i < num_seeds; ++i) {
            seeds.push_back(derive_seed(g.seed, kStreamEnsemble, static_cast<std::uint64_t>(i)));
        }
    }
    auto result = ensemble_forecast(config, collection, seeds, g.jobs);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto out = open_out(g.out / "seeds" / ("forecast_seed_" + std::to_string(seeds[i]) + ".csv"));
        write_forecast_csv(out, result.ids, result.per_seed[i]);
    }
    auto out = open_out(g.out / "forecast.csv");
    write_forecast_csv(out, result.ids, result.ensemble);
    std::cerr << "wrote " << seeds.size() << " per-seed forecasts and the ensemble to " << g.out.string() << '\n';
}

void cmd_evaluate(const Globals& g, const fs::path& manifest, const fs::path& truth_path,
                  const std::vector<std::string>& forecast_specs) {
    auto collection = load(manifest);
    auto truth = read_forecast_csv(truth_path);
    std::vector<EvaluationReport> reports;
    for (const auto& spec : forecast_specs) {
        // label=path or just path (label = file stem)
        auto eq = spec.find('=');
        fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
        std::string label = eq == std::string::npos ? path.stem().string() : spec.substr(0, eq);
        auto table = read_forecast_csv(path);

        std::set<std::string> expected(truth.ids.begin(), truth.ids.end());
        std::set<std::string> got(table.ids.begin(), table.ids.end());
        if (expected != got) {
            std::string diff;
            for (const auto& id : expected) {
                if (!got.count(id)) {
                    diff += " missing:" + id;
                }
            }
            for (const auto& id : got) {
                if (!expected.count(id)) {
                    diff += " unexpected:" + id;
                }
            }
            throw ContractError("forecast ids in '" + path.string() + "' do not match the truth file:" + diff);
        }
        std::vector<EvaluationInput> inputs;
        for (std::size_t i = 0; i < truth.ids.size(); ++i) {
            const auto* s = collection.find(truth.ids[i]);
            if (!s) {
                throw ContractError("truth series '" + truth.ids[i] + "' is not in the collection");
            }
            inputs.push_back({truth.ids[i], *table.find(truth.ids[i]), truth.values[i], s->values, s->period});
        }
        reports.push_back(evaluate(label, inputs));
    }
    auto metrics = open_out(g.out / "metrics.tsv");
    write_metrics_tsv(metrics, reports);
    auto summary = open_out(g.out / "summary.tsv");
    write_summary_tsv(summary, reports);
    std::ostringstream shown;
    write_summary_tsv(shown, reports);
    std::cout << shown.str();
}

void cmd_baseline(const Globals& g, const fs::path& manifest, const std::string& kind, int lags,
                  const std::string& search) {
    auto collection = load(manifest);
    const int h = common_horizon(collection);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;
    for (const auto& s : collection.series) {
        ids.push_back(s.id);
        values.push_back(s.values);
    }
    std::vector<std::vector<double>> forecasts;
    nlohmann::json meta;
    meta["kind"] = kind;
    meta["horizon"] = h;
    if (kind == "snaive") {
        for (const auto& s : collection.series) {
            forecasts.push_back(seasonal_naive(s.values, s.period, h));
        }
    } else {
        const bool pooled = kind == "ridge-pooled";
        const LambdaSearch method = search == "smbo" ? LambdaSearch::Smbo : LambdaSearch::GridCv;
        const double lambda = tune_ridge_lambda(values, lags, pooled, method, derive_seed(g.seed, kStreamRidge));
        meta["lags"] = lags;
        meta["lambda"] = lambda;
        meta["lambda_search"] = search;
        std::size_t fallbacks = 0;
        if (pooled) {
            auto model = fit_ridge_pooled(values, lags, lambda);
            meta["coefficients"] = model.coefficients;
            for (const auto& v : values) {
                forecasts.push_back(ridge_recursive_forecast(model, v, h));
            }
        } else {
            auto models = fit_ridge_unpooled(values, lags, lambda);
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (models[i]) {
                    forecasts.push_back(ridge_recursive_forecast(*models[i], values[i], h));
                } else {
                    forecasts.push_back(seasonal_naive(values[i], collection.series[i].period, h));
                    ++fallbacks;
                }
            }
            meta["naive_fallbacks"] = fallbacks;
        }
    }
    auto out = open_out(g.out / (kind + ".csv"));
    write_forecast_csv(out, ids, forecasts);
    auto meta_out = open_out(g.out / (kind + ".meta.json"));
    meta_out << meta.dump(2) << '\n';
    std::cerr << "wrote " << (g.out / (kind + ".csv")).string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global recurrent-network forecasting toolkit"};
    app.require_subcommand(1);
    Globals g;
    std::string out_dir = g.out.string();
    app.add_option("--seed", g.seed, "root seed; every other seed is derived from it")->capture_default_str();
    app.add_option("--jobs", g.jobs, "parallel jobs over seeds/trials")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    std::string manifest;
    ModelFlags flags;

    auto* pre = app.add_subcommand("preprocess", "build and cache window sets; prints block counts");
    std::vector<std::string> stages{"train", "validation", "refit", "test"};
    pre->add_option("--manifest", manifest, "dataset manifest JSON")->required();
    pre->add_option("--stages", stages, "stages to build")->delimiter(',')->capture_default_str();
    flags.add_to(pre);

    auto* tun = app.add_subcommand("tune", "SMBO hyperparameter search");
    std::string space_path;
    std::size_t iterations = kDefaultTuneIterations;
    tun->add_option("--manifest", manifest, "dataset manifest JSON")->required();
    tun->add_option("--space", space_path, "hyperparameter space JSON (default: built-in ranges)");
    tun->add_option("--iterations", iterations, "tuning iterations")->capture_default_str()->check(CLI::PositiveNumber);
    flags.add_to(tun);

    auto* fc = app.add_subcommand("forecast", "seed-ensembled forecasts from a config");
    std::string config_path;
    std::string seeds_text;
    int num_seeds = 10;
    fc->add_option("--manifest", manifest, "dataset manifest JSON")->required();
    fc->add_option("--config", config_path, "model config JSON")->required();
    fc->add_option("--seeds", seeds_text, "comma-separated explicit seeds");
    fc->add_option("--num-seeds", num_seeds, "number of derived seeds when --seeds is absent")->capture_default_str();

    auto* ev = app.add_subcommand("evaluate", "SMAPE/MASE tables for forecast files");
    std::string truth;
    std::vector<std::string> forecast_files;
    ev->add_option("--manifest", manifest, "dataset manifest JSON (in-sample history)")->required();
    ev->add_option("--truth", truth, "CSV id,v1..vH with the actual future values")->required();
    ev->add_option("forecasts", forecast_files, "forecast CSVs, optionally label=path")->required();

    auto* bl = app.add_subcommand("baseline", "seasonal naive or ridge AR forecasts");
    std::string kind;
    int lags = 10;
    std::string search = "grid-cv";
    bl->add_option("--manifest", manifest, "dataset manifest JSON")->required();
    bl->add_option("--kind", kind, "snaive, ridge-pooled or ridge-unpooled")
        ->required()
        ->check(CLI::IsMember({"snaive", "ridge-pooled", "ridge-unpooled"}));
    bl->add_option("--lags", lags, "number of lags for ridge models")->capture_default_str()->check(CLI::PositiveNumber);
    bl->add_option("--lambda-search", search, "grid-cv or smbo")
        ->capture_default_str()
        ->check(CLI::IsMember({"grid-cv", "smbo"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }
    g.out = out_dir;

    try {
        if (*pre) {
            cmd_preprocess(g, manifest, flags, stages);
        } else if (*tun) {
            cmd_tune(g, manifest, space_path, flags, iterations);
        } else if (*fc) {
            cmd_forecast(g, manifest, config_path, seeds_text, num_seeds);
        } else if (*ev) {
            cmd_evaluate(g, manifest, truth, forecast_files);
        } else if (*bl) {
            cmd_baseline(g, manifest, kind, lags, search);
        }
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitContract;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
