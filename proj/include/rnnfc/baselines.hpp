#pragma once

#include "rnnfc/data.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rnnfc {

/// Step k repeats the value at length - period + ((k-1) mod period).
std::vector<double> seasonal_naive(std::span<const double> values, int period, int horizon);

struct RidgeModel {
    int lags = 1;
    std::vector<double> coefficients;  // intercept, then lag 1 (most recent) .. lag p
    double lambda = 0.0;
    bool pooled = false;
};

/// Lag rows of one series: row t holds [y_{t-1}, ..., y_{t-p}] with target y_t.
void append_lag_rows(std::span<const double> values, int lags, std::vector<std::vector<double>>& rows,
                     std::vector<double>& targets);

/// Closed-form ridge on explicit rows; the intercept is not penalized.
RidgeModel fit_ridge_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& targets, int lags,
                          double lambda);

/// Divides by the mean of the values; ScalingError when that mean is not positive.
std::vector<double> mean_scaled(std::span<const double> values);

/// One model on the mean-scaled lag rows of every series.
RidgeModel fit_ridge_pooled(const std::vector<std::vector<double>>& series, int lags, double lambda);

/// One model per mean-scaled series; empty for series shorter than lags + 2.
std::vector<std::optional<RidgeModel>> fit_ridge_unpooled(const std::vector<std::vector<double>>& series, int lags,
                                                          double lambda);

/// Recursive forecast on raw (unscaled) data.
std::vector<double> ridge_recursive_forecast_raw(const RidgeModel& model, std::span<const double> values,
                                                 int horizon);

/// Recursive forecast of a mean-scaled model: scale by the series mean, forecast, unscale.
std::vector<double> ridge_recursive_forecast(const RidgeModel& model, std::span<const double> values, int horizon);

enum class LambdaSearch { GridCv, Smbo };

/// grid-cv: 10-fold random row folds, MSE. smbo: 70/30 chronological split per series,
/// mean SMAPE, lambda in [0, 1] pooled or [0, 200] unpooled.
double tune_ridge_lambda(const std::vector<std::vector<double>>& series, int lags, bool pooled, LambdaSearch method,
                         std::uint64_t seed, std::size_t iterations = 50);

} // namespace rnnfc
