#include "rnnfc/data.hpp"

#include "rnnfc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rnnfc {

namespace {

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string where(const std::string& source, std::size_t row, std::size_t col) {
    std::ostringstream os;
    os << source << ": row " << row << ", column " << col;
    return os.str();
}

double parse_value(const std::string& field, const std::string& source, std::size_t row, std::size_t col) {
    if (field.empty() || field == "NA") {
        return kMissing;
    }
    double value = 0.0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("malformed numeric field '" + field + "' at " + where(source, row, col));
    }
    return value;
}

int parse_int(const std::string& field, const std::string& source, std::size_t row, std::size_t col) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("malformed integer field '" + field + "' at " + where(source, row, col));
    }
    return value;
}

TimeSeries make_series(std::string id, const LoadOptions& options) {
    TimeSeries s;
    s.id = std::move(id);
    s.period = options.period;
    s.horizon = options.horizon;
    s.integer_valued = options.integer_valued;
    s.start_index = options.start_index;
    return s;
}

} // namespace

bool TimeSeries::has_missing() const {
    return std::any_of(values.begin(), values.end(), is_missing);
}

int TimeSeries::phase(std::size_t i) const {
    return static_cast<int>((static_cast<std::size_t>(start_index) + i) % static_cast<std::size_t>(period));
}

void TimeSeries::validate() const {
    if (values.empty()) {
        throw ValidationError("series '" + id + "' has no values");
    }
    if (period < 1) {
        throw ValidationError("series '" + id + "' has period < 1");
    }
    if (horizon < 1) {
        throw ValidationError("series '" + id + "' has horizon < 1");
    }
    if (start_index < 0 || start_index >= period) {
        throw ValidationError("series '" + id + "' has start_index outside [0, period)");
    }
}

const TimeSeries* SeriesCollection::find(const std::string& id) const {
    for (const auto& s : series) {
        if (s.id == id) {
            return &s;
        }
    }
    return nullptr;
}

void SeriesCollection::validate() const {
    std::set<std::string> seen;
    for (const auto& s : series) {
        s.validate();
        if (!seen.insert(s.id).second) {
            throw ValidationError("duplicate series id '" + s.id + "'");
        }
    }
}

SeriesCollection parse_collection(std::istream& in, const LoadOptions& options, const std::string& source) {
    SeriesCollection collection;
    collection.name = options.name;
    collection.horizon = options.horizon;

    std::string line;
    std::size_t row = 0;
    std::unordered_map<std::string, std::size_t> index_of;

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (fields.empty() || fields[0].empty()) {
            throw ParseError("missing series id at " + where(source, row, 1));
        }

        if (options.format == CsvFormat::LongCsv) {
            if (fields.size() != 2) {
                throw ParseError("expected 'id,value' at " + where(source, row, 1));
            }
            if (row == 1 && fields[0] == "id" && fields[1] == "value") {
                continue;
            }
            double v = parse_value(fields[1], source, row, 2);
            auto it = index_of.find(fields[0]);
            if (it == index_of.end()) {
                index_of.emplace(fields[0], collection.series.size());
                collection.series.push_back(make_series(fields[0], options));
                collection.series.back().values.push_back(v);
            } else {
                collection.series[it->second].values.push_back(v);
            }
            continue;
        }

        TimeSeries s = make_series(fields[0], options);
        std::size_t first_value = 1;
        if (options.horizon_column) {
            if (fields.size() < 2) {
                throw ParseError("missing horizon column at " + where(source, row, 2));
            }
            if (!fields[1].empty()) {
                s.horizon = parse_int(fields[1], source, row, 2);
            }
            first_value = 2;
        }
        if (fields.size() <= first_value) {
            throw ParseError("series '" + s.id + "' has no values at " + where(source, row, first_value + 1));
        }
        for (std::size_t c = first_value; c < fields.size(); ++c) {
            s.values.push_back(parse_value(fields[c], source, row, c + 1));
        }
        if (index_of.count(s.id) != 0) {
            throw ValidationError("duplicate series id '" + s.id + "' at " + where(source, row, 1));
        }
        index_of.emplace(s.id, collection.series.size());
        collection.series.push_back(std::move(s));
    }

    if (collection.series.empty()) {
        throw ParseError("no series found in " + source);
    }
    collection.validate();
    return collection;
}

SeriesCollection load_collection(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_collection(in, options, path.string());
}

ImputePolicy parse_impute_policy(const std::string& name) {
    if (name == "median-by-phase") {
        return ImputePolicy::MedianByPhase;
    }
    if (name == "zero-fill") {
        return ImputePolicy::ZeroFill;
    }
    if (name == "none" || name.empty()) {
        return ImputePolicy::None;
    }
    throw ParseError("unknown imputation policy '" + name + "'");
}

CollectionManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }

    CollectionManifest m;
    try {
        m.name = j.at("name").get<std::string>();
        m.period = j.at("period").get<int>();
        m.horizon = j.at("horizon").get<int>();
        m.integer_valued = j.value("integer_valued", false);
        auto base = path.parent_path();
        for (const auto& f : j.at("files")) {
            std::filesystem::path p = f.get<std::string>();
            m.files.push_back(p.is_absolute() ? p : base / p);
        }
        auto format = j.value("format", std::string("one-row-per-series-csv"));
        if (format == "long-csv") {
            m.format = CsvFormat::LongCsv;
        } else if (format == "one-row-per-series-csv") {
            m.format = CsvFormat::OneRowPerSeries;
        } else {
            throw ParseError("manifest " + path.string() + ": unknown format '" + format + "'");
        }
        m.horizon_column = j.value("horizon_column", false);
        m.start_index = j.value("start_index", 0);
        m.imputation = parse_impute_policy(j.value("imputation", std::string("none")));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }
    if (m.files.empty()) {
        throw ParseError("manifest " + path.string() + " lists no files");
    }
    return m;
}

SeriesCollection load_manifest(const CollectionManifest& manifest) {
    LoadOptions options;
    options.format = manifest.format;
    options.period = manifest.period;
    options.horizon = manifest.horizon;
    options.horizon_column = manifest.horizon_column;
    options.integer_valued = manifest.integer_valued;
    options.start_index = manifest.start_index;
    options.name = manifest.name;

    SeriesCollection out;
    out.name = manifest.name;
    out.horizon = manifest.horizon;
    for (const auto& file : manifest.files) {
        auto part = load_collection(file, options);
        for (auto& s : part.series) {
            if (manifest.imputation != ImputePolicy::None) {
                s = impute_missing(s, manifest.imputation);
            }
            out.series.push_back(std::move(s));
        }
    }
    out.validate();
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw ValidationError("median of an empty list");
    }
    std::sort(values.begin(), values.end());
    auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TimeSeries impute_missing(const TimeSeries& series, ImputePolicy policy) {
    TimeSeries out = series;
    if (!series.has_missing() || policy == ImputePolicy::None) {
        return out;
    }
    if (policy == ImputePolicy::ZeroFill) {
        for (auto& v : out.values) {
            if (is_missing(v)) {
                v = 0.0;
            }
        }
        return out;
    }

    std::map<int, std::vector<double>> by_phase;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (!is_missing(series.values[i])) {
            by_phase[series.phase(i)].push_back(series.values[i]);
        }
    }
    std::map<int, double> fill;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (!is_missing(out.values[i])) {
            continue;
        }
        int p = series.phase(i);
        auto it = fill.find(p);
        if (it == fill.end()) {
            auto observed = by_phase.find(p);
            if (observed == by_phase.end()) {
                throw ImputationError("series '" + series.id + "': phase " + std::to_string(p) +
                                      " has no observed values");
            }
            it = fill.emplace(p, median(observed->second)).first;
        }
        out.values[i] = it->second;
    }
    return out;
}

SplitSeries split_train_validation(const TimeSeries& series) {
    auto h = static_cast<std::size_t>(series.horizon);
    if (series.values.size() <= h) {
        throw SplitError("series '" + series.id + "' of length " + std::to_string(series.values.size()) +
                         " is not longer than its horizon " + std::to_string(h));
    }
    SplitSeries split;
    auto cut = series.values.end() - static_cast<std::ptrdiff_t>(h);
    split.train.assign(series.values.begin(), cut);
    split.validation_target.assign(cut, series.values.end());
    return split;
}

} // namespace rnnfc
