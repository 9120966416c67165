#pragma once

#include "rnnfc/metrics.hpp"
#include "rnnfc/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rnnfc {

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text, const std::string& source = "<config>");
ModelConfig read_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ModelConfig& config);

std::string space_to_json(const HyperparameterSpace& space);
HyperparameterSpace space_from_json(const std::string& text, const std::string& source = "<space>");
HyperparameterSpace read_space(const std::filesystem::path& path);

/// trial,minibatch_size,...,validation_smape,seconds
void write_trial_log(std::ostream& out, const TuneResult& result);

/// id,f1,...,fH. Values are printed with round-trip precision.
void write_forecast_csv(std::ostream& out, const std::vector<std::string>& ids,
                        const std::vector<std::vector<double>>& forecasts);

struct ForecastTable {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;
    const std::vector<double>* find(const std::string& id) const;
};

ForecastTable read_forecast_csv(const std::filesystem::path& path);

/// model,series,smape,mase ("NA" for undefined values)
void write_metrics_tsv(std::ostream& out, const std::vector<EvaluationReport>& reports);

/// model,mean_smape,median_smape,mean_mase,median_mase,mean_rank_smape,mean_rank_mase,skipped
void write_summary_tsv(std::ostream& out, const std::vector<EvaluationReport>& reports);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace rnnfc
