#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rnnfc {

/// (100/H) * sum |F-Y| / ((|Y|+|F|)/2). UndefinedMetricError if F_k = Y_k = 0 for some k.
double smape(std::span<const double> forecast, std::span<const double> actual);

/// SMAPE with denominator max(|Y|+|F|+eps, 0.5+eps)/2; `halve = false` drops the /2.
double smape_modified(std::span<const double> forecast, std::span<const double> actual, double epsilon = 0.1,
                      bool halve = true);

/// Forecast MAE over the in-sample seasonal-naive MAE with lag `period`.
double mase(std::span<const double> forecast, std::span<const double> actual, std::span<const double> insample,
            int period);

struct MetricSummary {
    double mean = 0.0;
    double median = 0.0;
    std::size_t count = 0;
    std::size_t skipped = 0;
};

/// Mean and median over the defined values; AggregationError if none are defined.
MetricSummary aggregate(std::span<const std::optional<double>> values);

struct SeriesMetrics {
    std::string id;
    std::optional<double> smape;
    std::optional<double> mase;
};

struct EvaluationReport {
    std::string model_label;
    std::vector<SeriesMetrics> per_series;
    std::optional<MetricSummary> smape;  // empty when every series was undefined
    std::optional<MetricSummary> mase;
};

struct EvaluationInput {
    std::string id;
    std::vector<double> forecast;
    std::vector<double> actual;
    std::vector<double> insample;
    int period = 1;
};

EvaluationReport evaluate(const std::string& model_label, const std::vector<EvaluationInput>& inputs);

/// Per series, models ranked ascending with ties sharing the mean rank; returns each
/// model's mean rank over the series. Every table must cover the same series ids
/// (ContractError otherwise).
std::vector<double> rank_models(const std::vector<std::map<std::string, double>>& tables);

} // namespace rnnfc
