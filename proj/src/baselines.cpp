#include "rnnfc/baselines.hpp"

#include "rnnfc/error.hpp"
#include "rnnfc/metrics.hpp"
#include "rnnfc/smbo.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rnnfc {

std::vector<double> seasonal_naive(std::span<const double> values, int period, int horizon) {
    if (period < 1 || horizon < 0) {
        throw ContractError("seasonal_naive: period must be >= 1 and horizon >= 0");
    }
    const auto p = static_cast<std::size_t>(period);
    if (values.size() < p) {
        throw SizingError("seasonal_naive: series of length " + std::to_string(values.size()) +
                          " is shorter than one period (" + std::to_string(period) + ")");
    }
    std::vector<double> out(static_cast<std::size_t>(horizon));
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = values[values.size() - p + k % p];
    }
    return out;
}

void append_lag_rows(std::span<const double> values, int lags, std::vector<std::vector<double>>& rows,
                     std::vector<double>& targets) {
    const auto p = static_cast<std::size_t>(lags);
    for (std::size_t t = p; t < values.size(); ++t) {
        std::vector<double> row(p);
        for (std::size_t j = 0; j < p; ++j) {
            row[j] = values[t - 1 - j];
        }
        rows.push_back(std::move(row));
        targets.push_back(values[t]);
    }
}

RidgeModel fit_ridge_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& targets, int lags,
                          double lambda) {
    if (lags < 1) {
        throw ContractError("ridge: lags must be >= 1");
    }
    if (!(lambda >= 0.0)) {
        throw ContractError("ridge: lambda must be >= 0");
    }
    if (rows.empty()) {
        throw SizingError("ridge: no lag rows (series too short for " + std::to_string(lags) + " lags)");
    }
    const auto p = static_cast<Eigen::Index>(lags);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            X(i, j + 1) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        y(i) = targets[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd A = X.transpose() * X;
    for (Eigen::Index j = 1; j <= p; ++j) {
        A(j, j) += lambda;
    }
    Eigen::VectorXd rhs = X.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13) {
        throw NumericError("ridge: normal equations are singular" +
                           std::string(lambda == 0.0 ? " (collinear lags; use lambda > 0)" : ""));
    }
    Eigen::VectorXd beta = ldlt.solve(rhs);
    RidgeModel model;
    model.lags = lags;
    model.lambda = lambda;
    model.coefficients.assign(beta.data(), beta.data() + beta.size());
    for (double c : model.coefficients) {
        if (!std::isfinite(c)) {
            throw NumericError("ridge: non-finite coefficient");
        }
    }
    return model;
}

std::vector<double> mean_scaled(std::span<const double> values) {
    if (values.empty()) {
        throw SizingError("mean scaling: empty series");
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (!(mean > 0.0)) {
        throw ScalingError("mean scaling: series mean " + std::to_string(mean) + " is not positive");
    }
    std::vector<double> out(values.begin(), values.end());
    for (auto& v : out) {
        v /= mean;
    }
    return out;
}

RidgeModel fit_ridge_pooled(const std::vector<std::vector<double>>& series, int lags, double lambda) {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (const auto& s : series) {
        append_lag_rows(mean_scaled(s), lags, rows, targets);
    }
    auto model = fit_ridge_rows(rows, targets, lags, lambda);
    model.pooled = true;
    return model;
}

std::vector<std::optional<RidgeModel>> fit_ridge_unpooled(const std::vector<std::vector<double>>& series, int lags,
                                                          double lambda) {
    std::vector<std::optional<RidgeModel>> out;
    for (const auto& s : series) {
        if (s.size() < static_cast<std::size_t>(lags) + 2) {
            out.emplace_back();
            continue;
        }
        std::vector<std::vector<double>> rows;
        std::vector<double> targets;
        append_lag_rows(mean_scaled(s), lags, rows, targets);
        out.push_back(fit_ridge_rows(rows, targets, lags, lambda));
    }
    return out;
}

std::vector<double> ridge_recursive_forecast_raw(const RidgeModel& model, std::span<const double> values,
                                                 int horizon) {
    const auto p = static_cast<std::size_t>(model.lags);
    if (values.size() < p) {
        throw SizingError("ridge forecast: series of length " + std::to_string(values.size()) + " has fewer than " +
                          std::to_string(p) + " lags");
    }
    std::vector<double> history(values.end() - static_cast<std::ptrdiff_t>(p), values.end());
    std::vector<double> out;
    for (int k = 0; k < horizon; ++k) {
        double y = model.coefficients[0];
        for (std::size_t j = 0; j < p; ++j) {
            y += model.coefficients[j + 1] * history[history.size() - 1 - j];
        }
        out.push_back(y);
        history.push_back(y);
    }
    return out;
}

std::vector<double> ridge_recursive_forecast(const RidgeModel& model, std::span<const double> values, int horizon) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    auto scaled = mean_scaled(values);
    auto out = ridge_recursive_forecast_raw(model, scaled, horizon);
    for (auto& v : out) {
        v *= mean;
    }
    return out;
}

namespace {

constexpr int kFolds = 10;

// Mean squared error of k-fold CV over the given rows.
double cv_mse(const std::vector<std::vector<double>>& rows, const std::vector<double>& targets, int lags,
              double lambda, const std::vector<int>& fold) {
    double sse = 0.0;
    std::size_t count = 0;
    for (int f = 0; f < kFolds; ++f) {
        std::vector<std::vector<double>> tr;
        std::vector<double> ty;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (fold[i] != f) {
                tr.push_back(rows[i]);
                ty.push_back(targets[i]);
            }
        }
        if (tr.empty() || tr.size() == rows.size()) {
            continue;
        }
        RidgeModel m;
        try {
            m = fit_ridge_rows(tr, ty, lags, lambda);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (fold[i] == f) {
                double pred = m.coefficients[0];
                for (std::size_t j = 0; j < rows[i].size(); ++j) {
                    pred += m.coefficients[j + 1] * rows[i][j];
                }
                sse += (pred - targets[i]) * (pred - targets[i]);
                ++count;
            }
        }
    }
    return count ? sse / static_cast<double>(count) : std::numeric_limits<double>::infinity();
}

std::vector<int> random_folds(std::size_t n, std::mt19937_64& rng) {
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold[i] = static_cast<int>(i % kFolds);
    }
    std::shuffle(fold.begin(), fold.end(), rng);
    return fold;
}

double smape_split(const std::vector<std::vector<double>>& series, int lags, bool pooled, double lambda) {
    std::vector<std::vector<double>> heads;
    std::vector<std::vector<double>> tails;
    for (const auto& s : series) {
        const auto cut = static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(s.size())));
        heads.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut));
        tails.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(cut), s.end());
    }
    double total = 0.0;
    std::size_t count = 0;
    std::optional<RidgeModel> shared;
    std::vector<std::optional<RidgeModel>> own;
    if (pooled) {
        shared = fit_ridge_pooled(heads, lags, lambda);
    } else {
        own = fit_ridge_unpooled(heads, lags, lambda);
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (tails[i].empty()) {
            continue;
        }
        const RidgeModel* m = pooled ? &*shared : (own[i] ? &*own[i] : nullptr);
        if (!m) {
            continue;
        }
        auto f = ridge_recursive_forecast(*m, heads[i], static_cast<int>(tails[i].size()));
        total += smape_modified(f, tails[i]);
        ++count;
    }
    if (count == 0) {
        throw SizingError("ridge lambda search: no series long enough for the 70/30 split");
    }
    return total / static_cast<double>(count);
}

} // namespace

double tune_ridge_lambda(const std::vector<std::vector<double>>& series, int lags, bool pooled, LambdaSearch method,
                         std::uint64_t seed, std::size_t iterations) {
    const double hi = pooled ? 1.0 : 200.0;
    if (method == LambdaSearch::Smbo) {
        auto objective = [&](const std::vector<double>& p, std::size_t) { return smape_split(series, lags, pooled, p[0]); };
        auto r = smbo_minimize({Dimension{"lambda", 0.0, hi, false, false}}, objective, iterations, seed);
        return r.best_trial().point[0];
    }

    // Grid: 0 plus log-spaced values up to the range bound.
    std::vector<double> grid{0.0};
    for (int i = 0; i < 49; ++i) {
        grid.push_back(hi * std::pow(10.0, -6.0 + 6.0 * i / 48.0));
    }
    std::mt19937_64 rng(seed);
    double best_lambda = hi;
    double best = std::numeric_limits<double>::infinity();
    if (pooled) {
        std::vector<std::vector<double>> rows;
        std::vector<double> targets;
        for (const auto& s : series) {
            append_lag_rows(mean_scaled(s), lags, rows, targets);
        }
        const auto fold = random_folds(rows.size(), rng);
        for (double lambda : grid) {
            const double mse = cv_mse(rows, targets, lags, lambda, fold);
            if (mse < best) {
                best = mse;
                best_lambda = lambda;
            }
        }
        return best_lambda;
    }
    struct Part {
        std::vector<std::vector<double>> rows;
        std::vector<double> targets;
        std::vector<int> fold;
    };
    std::vector<Part> parts;
    for (const auto& s : series) {
        if (s.size() < static_cast<std::size_t>(lags) + 2) {
            continue;
        }
        Part part;
        append_lag_rows(mean_scaled(s), lags, part.rows, part.targets);
        part.fold = random_folds(part.rows.size(), rng);
        parts.push_back(std::move(part));
    }
    for (double lambda : grid) {
        double total = 0.0;
        for (const auto& part : parts) {
            total += cv_mse(part.rows, part.targets, lags, lambda, part.fold);
        }
        if (total < best) {
            best = total;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

} // namespace rnnfc
