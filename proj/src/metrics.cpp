#include "rnnfc/metrics.hpp"

#include "rnnfc/data.hpp"
#include "rnnfc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rnnfc {

namespace {

void check_lengths(std::span<const double> f, std::span<const double> y, const char* what) {
    if (f.empty()) {
        throw ContractError(std::string(what) + ": empty forecast");
    }
    if (f.size() != y.size()) {
        throw ShapeError(std::string(what) + ": forecast length " + std::to_string(f.size()) +
                         " differs from actual length " + std::to_string(y.size()));
    }
}

} // namespace

double smape(std::span<const double> f, std::span<const double> y) {
    check_lengths(f, y, "smape");
    double total = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double denom = (std::abs(y[k]) + std::abs(f[k])) / 2.0;
        if (denom == 0.0) {
            throw UndefinedMetricError("smape undefined: forecast and actual are both 0 at step " +
                                       std::to_string(k + 1) + " (use smape_modified)");
        }
        total += std::abs(f[k] - y[k]) / denom;
    }
    return 100.0 * total / static_cast<double>(f.size());
}

double smape_modified(std::span<const double> f, std::span<const double> y, double epsilon, bool halve) {
    check_lengths(f, y, "smape_modified");
    double total = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        double denom = std::max(std::abs(y[k]) + std::abs(f[k]) + epsilon, 0.5 + epsilon);
        if (halve) {
            denom /= 2.0;
        }
        total += std::abs(f[k] - y[k]) / denom;
    }
    return 100.0 * total / static_cast<double>(f.size());
}

double mase(std::span<const double> f, std::span<const double> y, std::span<const double> insample, int period) {
    check_lengths(f, y, "mase");
    if (period < 1) {
        throw ContractError("mase: period must be >= 1");
    }
    const auto M = static_cast<std::size_t>(period);
    if (insample.size() <= M) {
        throw UndefinedMetricError("mase undefined: in-sample length " + std::to_string(insample.size()) +
                                   " is not greater than the period " + std::to_string(period));
    }
    double scale = 0.0;
    for (std::size_t k = M; k < insample.size(); ++k) {
        scale += std::abs(insample[k] - insample[k - M]);
    }
    scale /= static_cast<double>(insample.size() - M);
    if (scale == 0.0) {
        throw UndefinedMetricError("mase undefined: in-sample seasonal naive error is 0");
    }
    double mae = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        mae += std::abs(f[k] - y[k]);
    }
    mae /= static_cast<double>(f.size());
    return mae / scale;
}

MetricSummary aggregate(std::span<const std::optional<double>> values) {
    std::vector<double> defined;
    MetricSummary s;
    for (const auto& v : values) {
        if (v) {
            defined.push_back(*v);
        } else {
            ++s.skipped;
        }
    }
    if (defined.empty()) {
        throw AggregationError("aggregate: no defined values among " + std::to_string(values.size()) + " series");
    }
    s.count = defined.size();
    s.mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
    s.median = median(defined);
    return s;
}

EvaluationReport evaluate(const std::string& model_label, const std::vector<EvaluationInput>& inputs) {
    EvaluationReport report;
    report.model_label = model_label;
    std::vector<std::optional<double>> smapes;
    std::vector<std::optional<double>> mases;
    for (const auto& in : inputs) {
        SeriesMetrics m;
        m.id = in.id;
        try {
            m.smape = smape(in.forecast, in.actual);
        } catch (const UndefinedMetricError&) {
        }
        try {
            m.mase = mase(in.forecast, in.actual, in.insample, in.period);
        } catch (const UndefinedMetricError&) {
        }
        smapes.push_back(m.smape);
        mases.push_back(m.mase);
        report.per_series.push_back(std::move(m));
    }
    try {
        report.smape = aggregate(smapes);
    } catch (const AggregationError&) {
    }
    try {
        report.mase = aggregate(mases);
    } catch (const AggregationError&) {
    }
    return report;
}

std::vector<double> rank_models(const std::vector<std::map<std::string, double>>& tables) {
    if (tables.size() < 2) {
        throw ContractError("rank_models needs at least two models");
    }
    for (std::size_t j = 1; j < tables.size(); ++j) {
        bool same = tables[j].size() == tables[0].size();
        for (auto a = tables[0].begin(), b = tables[j].begin(); same && a != tables[0].end(); ++a, ++b) {
            same = a->first == b->first;
        }
        if (!same) {
            std::string missing;
            for (const auto& [id, v] : tables[0]) {
                if (!tables[j].count(id)) {
                    missing += " " + id;
                }
            }
            for (const auto& [id, v] : tables[j]) {
                if (!tables[0].count(id)) {
                    missing += " " + id;
                }
            }
            throw ContractError("rank_models: series sets differ between models 1 and " + std::to_string(j + 1) +
                                ":" + missing);
        }
    }
    if (tables[0].empty()) {
        throw ContractError("rank_models: no series to rank");
    }
    const std::size_t n = tables.size();
    std::vector<double> total(n, 0.0);
    std::size_t series = 0;
    for (const auto& [id, unused] : tables[0]) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&, &sid = id](std::size_t a, std::size_t b) { return tables[a].at(sid) < tables[b].at(sid); });
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && tables[order[j + 1]].at(id) == tables[order[i]].at(id)) {
                ++j;
            }
            const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t k = i; k <= j; ++k) {
                total[order[k]] += rank;
            }
            i = j + 1;
        }
        ++series;
    }
    for (auto& t : total) {
        t /= static_cast<double>(series);
    }
    return total;
}

} // namespace rnnfc
