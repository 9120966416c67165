#include "rnnfc/config_io.hpp"

#include "rnnfc/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace rnnfc {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(source + ": " + e.what());
    }
}

template <typename T>
T get(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) {
        throw ParseError(source + ": missing key '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(source + ": key '" + key + "': " + e.what());
    }
}

json int_range(IntRange r) { return json::array({r.lo, r.hi}); }
json real_range(RealRange r) { return json::array({r.lo, r.hi}); }

IntRange get_int_range(const json& j, const char* key, const std::string& source) {
    auto v = get<std::vector<int>>(j, key, source);
    if (v.size() != 2) {
        throw ParseError(source + ": '" + key + "' must be [lo, hi]");
    }
    return {v[0], v[1]};
}

RealRange get_real_range(const json& j, const char* key, const std::string& source) {
    auto v = get<std::vector<double>>(j, key, source);
    if (v.size() != 2) {
        throw ParseError(source + ": '" + key + "' must be [lo, hi]");
    }
    return {v[0], v[1]};
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string config_to_json(const ModelConfig& c) {
    json h;
    h["minibatch_size"] = c.hyper.minibatch_size;
    h["epochs"] = c.hyper.epochs;
    h["epoch_size"] = c.hyper.epoch_size;
    if (c.hyper.learning_rate) {
        h["learning_rate"] = *c.hyper.learning_rate;
    }
    h["noise_sigma"] = c.hyper.noise_sigma;
    h["l2_psi"] = c.hyper.l2_psi;
    if (c.hyper.cell_dim) {
        h["cell_dim"] = *c.hyper.cell_dim;
    }
    if (c.hyper.param_budget) {
        h["param_budget"] = *c.hyper.param_budget;
    }
    h["layers"] = c.hyper.layers;
    h["init_sigma"] = c.hyper.init_sigma;
    json j;
    j["architecture"] = to_string(c.architecture);
    j["cell"] = to_string(c.cell);
    j["optimizer"] = to_string(c.optimizer);
    j["pipeline"] = to_string(c.pipeline);
    j["input_window_variant"] = to_string(c.input_window_variant);
    j["hyperparameters"] = h;
    return j.dump(2) + "\n";
}

ModelConfig config_from_json(const std::string& text, const std::string& source) {
    json j = parse_json(text, source);
    ModelConfig c;
    c.architecture = parse_architecture(get<std::string>(j, "architecture", source));
    c.cell = parse_cell_kind(get<std::string>(j, "cell", source));
    c.optimizer = parse_optimizer_kind(get<std::string>(j, "optimizer", source));
    c.pipeline = parse_pipeline(get<std::string>(j, "pipeline", source));
    if (j.contains("input_window_variant")) {
        c.input_window_variant = parse_window_variant(get<std::string>(j, "input_window_variant", source));
    }
    const json h = get<json>(j, "hyperparameters", source);
    c.hyper.minibatch_size = get<int>(h, "minibatch_size", source);
    c.hyper.epochs = get<int>(h, "epochs", source);
    c.hyper.epoch_size = get<int>(h, "epoch_size", source);
    if (h.contains("learning_rate") && !h["learning_rate"].is_null()) {
        c.hyper.learning_rate = get<double>(h, "learning_rate", source);
    }
    c.hyper.noise_sigma = get<double>(h, "noise_sigma", source);
    c.hyper.l2_psi = get<double>(h, "l2_psi", source);
    if (h.contains("cell_dim")) {
        c.hyper.cell_dim = get<int>(h, "cell_dim", source);
    }
    if (h.contains("param_budget")) {
        c.hyper.param_budget = get<int>(h, "param_budget", source);
    }
    c.hyper.layers = get<int>(h, "layers", source);
    c.hyper.init_sigma = get<double>(h, "init_sigma", source);
    c.validate();
    return c;
}

ModelConfig read_config(const std::filesystem::path& path) { return config_from_json(read_text(path), path.string()); }

void write_config(const std::filesystem::path& path, const ModelConfig& config) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << config_to_json(config);
}

std::string space_to_json(const HyperparameterSpace& s) {
    json j;
    j["minibatch_size"] = int_range(s.minibatch_size);
    j["epochs"] = int_range(s.epochs);
    j["epoch_size"] = int_range(s.epoch_size);
    j["noise_sigma"] = real_range(s.noise_sigma);
    j["l2_psi"] = real_range(s.l2_psi);
    if (s.cell_dim) {
        j["cell_dim"] = int_range(*s.cell_dim);
    }
    if (s.param_budget) {
        j["param_budget"] = int_range(*s.param_budget);
    }
    j["layers"] = int_range(s.layers);
    j["init_sigma"] = real_range(s.init_sigma);
    if (s.learning_rate) {
        j["learning_rate"] = real_range(*s.learning_rate);
    }
    return j.dump(2) + "\n";
}

HyperparameterSpace space_from_json(const std::string& text, const std::string& source) {
    json j = parse_json(text, source);
    HyperparameterSpace s;
    s.minibatch_size = get_int_range(j, "minibatch_size", source);
    s.epochs = get_int_range(j, "epochs", source);
    s.epoch_size = get_int_range(j, "epoch_size", source);
    s.noise_sigma = get_real_range(j, "noise_sigma", source);
    s.l2_psi = get_real_range(j, "l2_psi", source);
    s.cell_dim.reset();
    if (j.contains("cell_dim")) {
        s.cell_dim = get_int_range(j, "cell_dim", source);
    }
    if (j.contains("param_budget")) {
        s.param_budget = get_int_range(j, "param_budget", source);
    }
    s.layers = get_int_range(j, "layers", source);
    s.init_sigma = get_real_range(j, "init_sigma", source);
    if (j.contains("learning_rate")) {
        s.learning_rate = get_real_range(j, "learning_rate", source);
    }
    s.validate();
    return s;
}

HyperparameterSpace read_space(const std::filesystem::path& path) {
    return space_from_json(read_text(path), path.string());
}

void write_trial_log(std::ostream& out, const TuneResult& result) {
    const bool lr = result.best_config.optimizer != OptimizerKind::Cocob;
    const bool budget = result.best_config.hyper.param_budget.has_value();
    out << "trial,minibatch_size,epochs,epoch_size,noise_sigma,l2_psi," << (budget ? "param_budget" : "cell_dim")
        << ",layers,init_sigma" << (lr ? ",learning_rate" : "") << ",validation_smape,seconds\n";
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        const auto& t = result.trials[i];
        const auto& h = t.hyper;
        out << i + 1 << ',' << h.minibatch_size << ',' << h.epochs << ',' << h.epoch_size << ','
            << format_double(h.noise_sigma) << ',' << format_double(h.l2_psi) << ','
            << (budget ? *h.param_budget : *h.cell_dim) << ',' << h.layers << ',' << format_double(h.init_sigma);
        if (lr) {
            out << ',' << format_double(*h.learning_rate);
        }
        out << ',' << (t.failed ? std::string("NA") : format_double(t.validation_smape)) << ','
            << format_double(std::round(t.seconds * 1000.0) / 1000.0) << '\n';
    }
}

void write_forecast_csv(std::ostream& out, const std::vector<std::string>& ids,
                        const std::vector<std::vector<double>>& forecasts) {
    std::size_t h = 0;
    for (const auto& f : forecasts) {
        h = std::max(h, f.size());
    }
    out << "id";
    for (std::size_t k = 1; k <= h; ++k) {
        out << ",f" << k;
    }
    out << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i];
        for (double v : forecasts.at(i)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

const std::vector<double>* ForecastTable::find(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) {
            return &values[i];
        }
    }
    return nullptr;
}

ForecastTable read_forecast_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    ForecastTable table;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (row == 1 && line.rfind("id,", 0) == 0) || line == "id") {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        table.ids.push_back(field);
        std::vector<double> values;
        std::size_t col = 1;
        while (std::getline(ss, field, ',')) {
            ++col;
            double v = 0.0;
            auto r = std::from_chars(field.data(), field.data() + field.size(), v);
            if (r.ec != std::errc() || r.ptr != field.data() + field.size()) {
                throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                                 ": malformed number '" + field + "'");
            }
            values.push_back(v);
        }
        table.values.push_back(std::move(values));
    }
    return table;
}

void write_metrics_tsv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    out << "model\tseries\tsmape\tmase\n";
    for (const auto& r : reports) {
        for (const auto& s : r.per_series) {
            out << r.model_label << '\t' << s.id << '\t' << cell(s.smape) << '\t' << cell(s.mase) << '\n';
        }
    }
}

void write_summary_tsv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
    std::vector<double> rank_smape(reports.size(), 1.0);
    std::vector<double> rank_mase(reports.size(), 1.0);
    bool ranked_smape = false;
    bool ranked_mase = false;
    if (reports.size() >= 2) {
        // Rank over the series where every model's metric is defined.
        auto tables = [&](bool use_smape) {
            std::vector<std::map<std::string, double>> t(reports.size());
            for (std::size_t s = 0; s < reports.front().per_series.size(); ++s) {
                const auto& id = reports.front().per_series[s].id;
                bool all = true;
                for (const auto& r : reports) {
                    const auto& m = r.per_series.at(s);
                    all = all && m.id == id && (use_smape ? m.smape : m.mase).has_value();
                }
                if (all) {
                    for (std::size_t k = 0; k < reports.size(); ++k) {
                        const auto& m = reports[k].per_series[s];
                        t[k][id] = *(use_smape ? m.smape : m.mase);
                    }
                }
            }
            return t;
        };
        auto ts = tables(true);
        if (!ts.front().empty()) {
            rank_smape = rank_models(ts);
            ranked_smape = true;
        }
        auto tm = tables(false);
        if (!tm.front().empty()) {
            rank_mase = rank_models(tm);
            ranked_mase = true;
        }
    }
    auto num = [](double v) { return format_double(v); };
    out << "model\tmean_smape\tmedian_smape\tmean_mase\tmedian_mase\tmean_rank_smape\tmean_rank_mase\tskipped\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        std::size_t skipped = 0;
        for (const auto& s : r.per_series) {
            skipped += (!s.smape || !s.mase) ? 1 : 0;
        }
        out << r.model_label << '\t' << (r.smape ? num(r.smape->mean) : "NA") << '\t'
            << (r.smape ? num(r.smape->median) : "NA") << '\t' << (r.mase ? num(r.mase->mean) : "NA") << '\t'
            << (r.mase ? num(r.mase->median) : "NA") << '\t'
            << (ranked_smape || reports.size() == 1 ? num(rank_smape[k]) : "NA") << '\t'
            << (ranked_mase || reports.size() == 1 ? num(rank_mase[k]) : "NA") << '\t' << skipped << '\n';
    }
}

} // namespace rnnfc
