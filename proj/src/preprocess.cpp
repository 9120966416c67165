#include "rnnfc/preprocess.hpp"

#include "rnnfc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rnnfc {

namespace {

struct BlockLayout {
    std::size_t first = 1;  // start offset of the first block
    std::size_t count = 0;
};

std::ptrdiff_t signed_count(std::size_t length, int m, int n, Stage stage) {
    auto l = static_cast<std::ptrdiff_t>(length);
    switch (stage) {
    case Stage::Train:
        return l - 2 * n - m;
    case Stage::Validation:
    case Stage::Refit:
        return l - n - m;
    case Stage::Test:
        return l >= m ? 1 : 0;
    }
    return 0;
}

std::size_t minimum_length(int m, int n, Stage stage) {
    switch (stage) {
    case Stage::Train:
        return static_cast<std::size_t>(2 * n + m + 1);
    case Stage::Validation:
    case Stage::Refit:
        return static_cast<std::size_t>(n + m + 1);
    case Stage::Test:
        return static_cast<std::size_t>(m);
    }
    return 0;
}

BlockLayout layout(std::size_t length, int m, int n, Stage stage) {
    if (m < 1 || n < 1) {
        throw SizingError("window sizes must be >= 1 (m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");
    }
    auto count = signed_count(length, m, n, stage);
    if (count < 1) {
        throw SizingError("series of length " + std::to_string(length) + " yields no " + to_string(stage) +
                          " blocks for m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                          "; minimum length is " + std::to_string(minimum_length(m, n, stage)));
    }
    BlockLayout out;
    out.count = static_cast<std::size_t>(count);
    out.first = stage == Stage::Test ? length - static_cast<std::size_t>(m) : 1;
    return out;
}

void check_nonnegative(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) {
            throw DomainError("log transform: negative or missing value at index " + std::to_string(i));
        }
    }
}

} // namespace

std::string to_string(Pipeline p) { return p == Pipeline::Stl ? "STL" : "NOSTL"; }

std::string to_string(Stage s) {
    switch (s) {
    case Stage::Train:
        return "train";
    case Stage::Validation:
        return "validation";
    case Stage::Refit:
        return "refit";
    case Stage::Test:
        return "test";
    }
    return "?";
}

std::string to_string(InputFormat f) { return f == InputFormat::MovingWindow ? "mw" : "seq"; }

std::string to_string(WindowVariant v) { return v == WindowVariant::Small ? "small" : "large"; }

Pipeline parse_pipeline(const std::string& s) {
    if (s == "STL" || s == "stl") {
        return Pipeline::Stl;
    }
    if (s == "NOSTL" || s == "nostl" || s == "NSTL") {
        return Pipeline::NoStl;
    }
    throw ParseError("unknown pipeline '" + s + "'");
}

Stage parse_stage(const std::string& s) {
    for (auto st : {Stage::Train, Stage::Validation, Stage::Refit, Stage::Test}) {
        if (to_string(st) == s) {
            return st;
        }
    }
    throw ParseError("unknown stage '" + s + "'");
}

WindowVariant parse_window_variant(const std::string& s) {
    if (s == "small") {
        return WindowVariant::Small;
    }
    if (s == "large") {
        return WindowVariant::Large;
    }
    throw ParseError("unknown input window variant '" + s + "'");
}

void NormalizationRecord::validate() const {
    if (log_offset != 0 && log_offset != 1) {
        throw ContractError("normalization record: log_offset must be 0 or 1");
    }
    if (pipeline == Pipeline::Stl) {
        if (!trend_anchor || !seasonal_future || series_mean) {
            throw ContractError("normalization record: STL requires trend_anchor and seasonal_future only");
        }
    } else {
        if (!series_mean || trend_anchor || seasonal_future) {
            throw ContractError("normalization record: NOSTL requires series_mean only");
        }
    }
}

LogResult log_transform(std::span<const double> values, double epsilon) {
    check_nonnegative(values);
    LogResult out;
    if (values.empty()) {
        return out;
    }
    double lo = *std::min_element(values.begin(), values.end());
    out.log_offset = lo > epsilon ? 0 : 1;
    out.values = apply_log(values, out.log_offset);
    return out;
}

std::vector<double> apply_log(std::span<const double> values, int log_offset) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::log(values[i] + log_offset);
    }
    return out;
}

ScaleResult mean_scale(std::span<const double> values) {
    if (values.empty()) {
        throw ScalingError("mean scaling of an empty series");
    }
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (!(mean > 0.0)) {
        throw ScalingError("mean scaling requires a positive mean (got " + std::to_string(mean) + ")");
    }
    ScaleResult out;
    out.mean = mean;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.values[i] = values[i] / mean;
    }
    return out;
}

double log_epsilon(bool integer_valued) { return integer_valued ? 0.0 : 1e-8; }

std::pair<int, int> input_window_options(int horizon, int period) {
    auto by_horizon = static_cast<int>(std::ceil(1.25 * horizon));
    auto by_period = static_cast<int>(std::ceil(1.25 * period));
    return {by_horizon, by_period};
}

int choose_input_window_size(int horizon, int period, std::size_t length, WindowVariant variant) {
    if (length == 0) {
        throw SizingError("input window sizing needs a non-empty series");
    }
    auto [a, b] = input_window_options(horizon, period);
    int preferred = variant == WindowVariant::Small ? std::min(a, b) : std::max(a, b);
    int other = variant == WindowVariant::Small ? std::max(a, b) : std::min(a, b);
    // one training block needs l - 2n - m >= 1
    auto largest = static_cast<std::ptrdiff_t>(length) - 2 * static_cast<std::ptrdiff_t>(horizon) - 1;
    if (preferred <= largest) {
        return preferred;
    }
    if (other <= largest) {
        return other;
    }
    if (largest >= 1) {
        return static_cast<int>(largest);
    }
    throw SizingError("no feasible input window size for length " + std::to_string(length) + " and horizon " +
                      std::to_string(horizon));
}

std::size_t block_count(std::size_t length, int m, int n, Stage stage) {
    auto c = signed_count(length, m, n, stage);
    return c > 0 ? static_cast<std::size_t>(c) : 0;
}

WindowSet build_windows(std::span<const double> values, int m, int n, Stage stage) {
    const auto l = values.size();
    auto lay = layout(l, m, n, stage);
    const auto um = static_cast<std::size_t>(m);
    const auto un = static_cast<std::size_t>(n);

    WindowSet ws;
    ws.m = m;
    ws.n = n;
    ws.stage = stage;
    ws.format = InputFormat::MovingWindow;
    ws.blocks.reserve(lay.count);

    const std::size_t reserved_start = l - un;  // first index of the held-out region
    for (std::size_t k = 0; k < lay.count; ++k) {
        const std::size_t s = lay.first + k;
        WindowBlock block;
        block.input.assign(values.begin() + static_cast<std::ptrdiff_t>(s),
                           values.begin() + static_cast<std::ptrdiff_t>(s + um));
        bool with_target = false;
        switch (stage) {
        case Stage::Train:
        case Stage::Refit:
            with_target = true;
            break;
        case Stage::Validation:
            with_target = s + um + un <= reserved_start || k + 1 == lay.count;
            break;
        case Stage::Test:
            break;
        }
        if (with_target) {
            block.target = std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(s + um),
                                               values.begin() + static_cast<std::ptrdiff_t>(s + um + un));
        }
        ws.blocks.push_back(std::move(block));
    }
    if (stage == Stage::Test) {
        for (std::size_t s = 1; s < lay.first; ++s) {
            ws.warmup.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(s),
                                   values.begin() + static_cast<std::ptrdiff_t>(s + um));
        }
    }
    return ws;
}

void trend_normalize(WindowBlock& block, const Decomposition& decomposition, std::size_t anchor_index) {
    if (anchor_index >= decomposition.trend.size()) {
        throw SizingError("trend anchor index " + std::to_string(anchor_index) + " outside decomposition of length " +
                          std::to_string(decomposition.trend.size()));
    }
    const double anchor = decomposition.trend[anchor_index];
    for (auto& v : block.input) {
        v -= anchor;
    }
    if (block.target) {
        for (auto& v : *block.target) {
            v -= anchor;
        }
    }
    block.record.trend_anchor = anchor;
}

WindowSet preprocess_series(const TimeSeries& series, Pipeline pipeline, int m, int n, Stage stage,
                            InputFormat format) {
    series.validate();
    if (series.has_missing()) {
        throw ValidationError("series '" + series.id + "' still has missing values; impute first");
    }
    if (n != series.horizon) {
        throw ContractError("series '" + series.id + "': output window " + std::to_string(n) +
                            " differs from horizon " + std::to_string(series.horizon));
    }
    const auto& y = series.values;
    const std::size_t l = y.size();
    const auto un = static_cast<std::size_t>(n);
    const bool holds_out = stage == Stage::Train || stage == Stage::Validation;
    if (holds_out && l <= un) {
        throw SizingError("series '" + series.id + "' is not longer than its horizon");
    }
    const std::size_t visible = holds_out ? l - un : l;
    const double eps = log_epsilon(series.integer_valued);

    NormalizationRecord base;
    base.pipeline = pipeline;
    std::vector<double> z;  // normalized full series before local (trend) normalization
    Decomposition decomposition;

    try {
        if (pipeline == Pipeline::NoStl) {
            auto scaled = mean_scale(std::span(y).first(visible));
            base.series_mean = scaled.mean;
            std::vector<double> full(l);
            for (std::size_t i = 0; i < l; ++i) {
                full[i] = y[i] / scaled.mean;
            }
            auto logged = log_transform(full, eps);
            base.log_offset = logged.log_offset;
            z = std::move(logged.values);
        } else {
            auto logged = log_transform(y, eps);
            base.log_offset = logged.log_offset;
            decomposition = stl_periodic(std::span(logged.values).first(visible), series.period);
            z = std::move(logged.values);
            for (std::size_t i = 0; i < l; ++i) {
                z[i] -= decomposition.seasonal_at(i);
            }
        }
    } catch (const ScalingError& e) {
        throw ScalingError("series '" + series.id + "': " + e.what());
    } catch (const DomainError& e) {
        throw DomainError("series '" + series.id + "': " + e.what());
    }

    auto finish_record = [&](WindowBlock& block, std::size_t anchor_index) {
        block.record = base;
        if (pipeline == Pipeline::Stl) {
            trend_normalize(block, decomposition, anchor_index);
            std::vector<double> future(un);
            for (std::size_t k = 0; k < un; ++k) {
                future[k] = decomposition.seasonal_at(anchor_index + 1 + k);
            }
            block.record.seasonal_future = std::move(future);
        }
    };

    if (format == InputFormat::Sequence) {
        std::size_t end = 0;  // exclusive end of the encoder sequence
        switch (stage) {
        case Stage::Train:
            end = visible >= un ? visible - un : 0;
            break;
        case Stage::Validation:
            end = visible;
            break;
        case Stage::Refit:
            end = l - un;
            break;
        case Stage::Test:
            end = l;
            break;
        }
        if (end < 1) {
            throw SizingError("series '" + series.id + "' of length " + std::to_string(l) +
                              " leaves no encoder input for the " + to_string(stage) + " stage");
        }
        WindowSet ws;
        ws.series_id = series.id;
        ws.m = static_cast<int>(end);
        ws.n = n;
        ws.stage = stage;
        ws.format = InputFormat::Sequence;
        WindowBlock block;
        block.input.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(end));
        if (stage != Stage::Test) {
            block.target = std::vector<double>(z.begin() + static_cast<std::ptrdiff_t>(end),
                                               z.begin() + static_cast<std::ptrdiff_t>(end + un));
        }
        finish_record(block, end - 1);
        ws.blocks.push_back(std::move(block));
        return ws;
    }

    WindowSet ws;
    try {
        ws = build_windows(z, m, n, stage);
    } catch (const SizingError& e) {
        throw SizingError("series '" + series.id + "': " + e.what());
    }
    ws.series_id = series.id;
    const auto um = static_cast<std::size_t>(m);
    const std::size_t first = stage == Stage::Test ? l - um : 1;
    for (std::size_t k = 0; k < ws.blocks.size(); ++k) {
        finish_record(ws.blocks[k], first + k + um - 1);
    }
    if (pipeline == Pipeline::Stl) {
        for (std::size_t k = 0; k < ws.warmup.size(); ++k) {
            const double anchor = decomposition.trend[k + 1 + um - 1];
            for (auto& v : ws.warmup[k]) {
                v -= anchor;
            }
        }
    }
    return ws;
}

std::vector<double> normalize_future(std::span<const double> future, const NormalizationRecord& record) {
    record.validate();
    std::vector<double> out(future.size());
    if (record.pipeline == Pipeline::Stl) {
        if (record.seasonal_future->size() < future.size()) {
            throw ContractError("normalize_future: more values than seasonal_future entries");
        }
        for (std::size_t k = 0; k < future.size(); ++k) {
            out[k] = std::log(future[k] + record.log_offset) - (*record.seasonal_future)[k] - *record.trend_anchor;
        }
    } else {
        for (std::size_t k = 0; k < future.size(); ++k) {
            out[k] = std::log(future[k] / *record.series_mean + record.log_offset);
        }
    }
    return out;
}

std::vector<double> postprocess_forecast(std::span<const double> raw, const NormalizationRecord& record,
                                         bool integer_valued, const PostprocessOptions& options) {
    record.validate();
    std::vector<double> out(raw.size());
    if (record.pipeline == Pipeline::Stl) {
        if (record.seasonal_future->size() != raw.size()) {
            throw ContractError("postprocess: forecast length " + std::to_string(raw.size()) +
                                " does not match seasonal_future length " +
                                std::to_string(record.seasonal_future->size()));
        }
        for (std::size_t k = 0; k < raw.size(); ++k) {
            double v = raw[k] + *record.trend_anchor;
            v += (*record.seasonal_future)[k];
            v = std::exp(v);
            v -= record.log_offset;
            out[k] = v;
        }
    } else {
        for (std::size_t k = 0; k < raw.size(); ++k) {
            double v = std::exp(raw[k]);
            v -= record.log_offset;
            v *= *record.series_mean;
            out[k] = v;
        }
    }
    for (auto& v : out) {
        if (integer_valued && options.round) {
            v = std::round(v);
        }
        if (options.clip && v <= 0.0) {
            v = 0.0;  // also turns -0.0 into 0.0
        }
    }
    return out;
}

} // namespace rnnfc
