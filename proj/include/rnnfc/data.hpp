#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rnnfc {

/// In-memory marker for a missing observation. Files use an empty field or "NA".
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// One identified univariate series, the atomic input of the toolkit.
struct TimeSeries {
    std::string id;
    std::vector<double> values;
    int period = 1;       // seasonality length M
    int start_index = 0;  // phase of values[0] within one period
    bool integer_valued = false;
    int horizon = 1;

    bool has_missing() const;
    /// Phase class of observation i, i.e. (start_index + i) mod period.
    int phase(std::size_t i) const;
    /// Throws ValidationError when a structural invariant is broken.
    void validate() const;
};

struct SeriesCollection {
    std::string name;
    int horizon = 1;
    std::vector<TimeSeries> series;

    std::size_t size() const { return series.size(); }
    const TimeSeries* find(const std::string& id) const;
    void validate() const;
};

struct SplitSeries {
    std::vector<double> train;
    std::vector<double> validation_target;
};

enum class CsvFormat {
    LongCsv,         // "id,value" rows, grouped by id in order of first appearance
    OneRowPerSeries  // "id[,horizon],v1,v2,..."
};

struct LoadOptions {
    CsvFormat format = CsvFormat::OneRowPerSeries;
    int period = 1;
    int horizon = 1;
    bool horizon_column = false;  // second field of each row is a per-series horizon (may be empty)
    bool integer_valued = false;
    int start_index = 0;
    std::string name;
};

SeriesCollection load_collection(const std::filesystem::path& path, const LoadOptions& options);
SeriesCollection parse_collection(std::istream& in, const LoadOptions& options,
                                  const std::string& source = "<stream>");

enum class ImputePolicy { MedianByPhase, ZeroFill, None };

ImputePolicy parse_impute_policy(const std::string& name);

/// Collection manifest as stored on disk (JSON).
struct CollectionManifest {
    std::string name;
    int period = 1;
    int horizon = 1;
    bool integer_valued = false;
    std::vector<std::filesystem::path> files;  // resolved against the manifest directory
    CsvFormat format = CsvFormat::OneRowPerSeries;
    bool horizon_column = false;
    int start_index = 0;
    ImputePolicy imputation = ImputePolicy::None;
};

CollectionManifest read_manifest(const std::filesystem::path& path);

/// Loads every file named by the manifest into one collection and applies its imputation policy.
SeriesCollection load_manifest(const CollectionManifest& manifest);

TimeSeries impute_missing(const TimeSeries& series, ImputePolicy policy);

/// Holds out the last H values; the caller uses the full series for final testing.
SplitSeries split_train_validation(const TimeSeries& series);

double median(std::vector<double> values);

} // namespace rnnfc
