#pragma once

#include "rnnfc/data.hpp"
#include "rnnfc/stl.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rnnfc {

enum class Pipeline { Stl, NoStl };

/// Which part of the series a WindowSet is built for.
///  - Train: last H values reserved; blocks end before them.
///  - Validation: blocks over the whole series, the final block targets the reserved H values.
///  - Refit: training on the whole series for final forecasting.
///  - Test: one final input window (plus warm-up inputs), no target.
enum class Stage { Train, Validation, Refit, Test };

/// Moving-window vector inputs, or one scalar-per-step encoder sequence.
enum class InputFormat { MovingWindow, Sequence };

enum class WindowVariant { Small, Large };

std::string to_string(Pipeline p);
std::string to_string(Stage s);
std::string to_string(InputFormat f);
std::string to_string(WindowVariant v);
Pipeline parse_pipeline(const std::string& s);
Stage parse_stage(const std::string& s);
WindowVariant parse_window_variant(const std::string& s);

/// Everything needed to map a normalized forecast back to the original scale.
struct NormalizationRecord {
    Pipeline pipeline = Pipeline::Stl;
    int log_offset = 0;
    std::optional<double> series_mean;
    std::optional<double> trend_anchor;
    std::optional<std::vector<double>> seasonal_future;

    /// Throws ContractError when the fields do not match the pipeline.
    void validate() const;
};

struct WindowBlock {
    std::vector<double> input;
    std::optional<std::vector<double>> target;
    NormalizationRecord record;
};

struct WindowSet {
    std::string series_id;
    std::vector<WindowBlock> blocks;
    /// Test stage only: normalized input windows preceding the final one, fed to build state.
    std::vector<std::vector<double>> warmup;
    int m = 0;
    int n = 0;
    Stage stage = Stage::Train;
    InputFormat format = InputFormat::MovingWindow;
};

struct LogResult {
    std::vector<double> values;
    int log_offset = 0;
};

/// Natural log when min(values) > epsilon, else log(v + 1).
LogResult log_transform(std::span<const double> values, double epsilon);

/// Applies log(v + offset) elementwise.
std::vector<double> apply_log(std::span<const double> values, int log_offset);

struct ScaleResult {
    std::vector<double> values;
    double mean = 0.0;
};

ScaleResult mean_scale(std::span<const double> values);

/// Epsilon of the log rule: 0 for count data, a tiny positive value otherwise.
double log_epsilon(bool integer_valued);

/// The two candidate window sizes: ceil(1.25 * H) and ceil(1.25 * period).
std::pair<int, int> input_window_options(int horizon, int period);

/// Picks the variant's candidate, falling back to the other candidate and then to the
/// largest m that still leaves one training block.
int choose_input_window_size(int horizon, int period, std::size_t length, WindowVariant variant);

/// Number of blocks the stage yields for a series of length l.
std::size_t block_count(std::size_t length, int m, int n, Stage stage);

/// Raw (un-normalized) windowing of `values`, which is always the full series.
WindowSet build_windows(std::span<const double> values, int m, int n, Stage stage);

/// Subtracts the trend value at `anchor_index` from input and target and stores it in the record.
void trend_normalize(WindowBlock& block, const Decomposition& decomposition, std::size_t anchor_index);

/// Full forward pipeline for one series.
/// STL: log transform, periodic STL, deseasonalize, trend-normalize.
/// NOSTL: mean scale, log transform.
/// For InputFormat::Sequence, `m` is ignored and the set holds one encoder sequence.
WindowSet preprocess_series(const TimeSeries& series, Pipeline pipeline, int m, int n, Stage stage,
                            InputFormat format = InputFormat::MovingWindow);

/// Applies the record's forward transforms to raw future values.
std::vector<double> normalize_future(std::span<const double> future, const NormalizationRecord& record);

struct PostprocessOptions {
    bool round = true;  // round when integer valued
    bool clip = true;
};

/// Reverses the preprocessing on H normalized forecasts.
std::vector<double> postprocess_forecast(std::span<const double> raw, const NormalizationRecord& record,
                                         bool integer_valued, const PostprocessOptions& options = {});

} // namespace rnnfc
