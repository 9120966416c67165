#include "rnnfc/data.hpp"
#include "rnnfc/error.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace rnnfc;

namespace {

SeriesCollection parse(const std::string& text, LoadOptions opts = {}) {
    std::istringstream in(text);
    return parse_collection(in, opts);
}

TimeSeries make(std::vector<double> v, int period = 1, int horizon = 1) {
    TimeSeries s;
    s.id = "s";
    s.values = std::move(v);
    s.period = period;
    s.horizon = horizon;
    return s;
}

} // namespace

TEST_CASE("one-row-per-series rows load in file order") {
    auto c = parse("s1,1,2,3\ns2,4,5,6\n");
    REQUIRE(c.size() == 2);
    CHECK(c.series[0].id == "s1");
    CHECK(c.series[1].values == std::vector<double>{4, 5, 6});
}

TEST_CASE("empty fields and NA become missing markers") {
    auto c = parse("s1,1,,3\ns2,NA,2\n");
    REQUIRE(c.series[0].values.size() == 3);
    CHECK(is_missing(c.series[0].values[1]));
    CHECK(is_missing(c.series[1].values[0]));
}

TEST_CASE("loader errors") {
    CHECK_THROWS_WITH(parse(""), Catch::Matchers::ContainsSubstring("no series found"));
    CHECK_THROWS_AS(parse("s1,1,x,3\n"), ParseError);
    CHECK_THROWS_AS(parse("s1,1\ns1,2\n"), ValidationError);
}

TEST_CASE("long format groups rows by id") {
    LoadOptions o;
    o.format = CsvFormat::LongCsv;
    auto c = parse("id,value\na,1\na,2\nb,3\n", o);
    REQUIRE(c.size() == 2);
    CHECK(c.series[0].values == std::vector<double>{1, 2});
    CHECK(c.series[1].values == std::vector<double>{3});
}

TEST_CASE("horizon column overrides the collection horizon") {
    LoadOptions o;
    o.horizon = 12;
    o.horizon_column = true;
    auto c = parse("a,6,1,2,3\nb,,4,5,6\n", o);
    CHECK(c.series[0].horizon == 6);
    CHECK(c.series[1].horizon == 12);
    CHECK(c.series[0].values.size() == 3);
}

TEST_CASE("median-by-phase imputation") {
    // period 7: phase 1 ("Tuesday") has values 2, 4, 6 and one gap.
    std::vector<double> v(28, 1.0);
    v[1] = 2;
    v[8] = 4;
    v[15] = 6;
    v[22] = kMissing;
    auto s = make(v, 7);
    auto out = impute_missing(s, ImputePolicy::MedianByPhase);
    CHECK(out.values[22] == 4.0);
    // Never touches observed values and is idempotent.
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i != 22) {
            CHECK(out.values[i] == v[i]);
        }
    }
    CHECK(impute_missing(out, ImputePolicy::MedianByPhase).values == out.values);
}

TEST_CASE("median-by-phase honours start_index") {
    auto s = make({kMissing, 10, 3, 20}, 2);
    s.start_index = 1;  // values[0] has phase 1, values[2] too
    CHECK(impute_missing(s, ImputePolicy::MedianByPhase).values[0] == 3.0);
}

TEST_CASE("all-missing phase is an imputation error naming the phase") {
    auto s = make({kMissing, 1, kMissing, 2}, 2);
    CHECK_THROWS_AS(impute_missing(s, ImputePolicy::MedianByPhase), ImputationError);
    CHECK_THROWS_WITH(impute_missing(s, ImputePolicy::MedianByPhase), Catch::Matchers::ContainsSubstring("0"));
}

TEST_CASE("zero-fill and identity") {
    CHECK(impute_missing(make({1, kMissing, 3}), ImputePolicy::ZeroFill).values == std::vector<double>{1, 0, 3});
    auto clean = make({1, 2, 3});
    CHECK(impute_missing(clean, ImputePolicy::MedianByPhase).values == clean.values);
}

TEST_CASE("train/validation split") {
    std::vector<double> v(10);
    for (int i = 0; i < 10; ++i) {
        v[i] = i + 1;
    }
    auto sp = split_train_validation(make(v, 1, 3));
    CHECK(sp.train == std::vector<double>{1, 2, 3, 4, 5, 6, 7});
    CHECK(sp.validation_target == std::vector<double>{8, 9, 10});
    auto joined = sp.train;
    joined.insert(joined.end(), sp.validation_target.begin(), sp.validation_target.end());
    CHECK(joined == v);

    CHECK_THROWS_AS(split_train_validation(make({1, 2, 3, 4, 5}, 1, 5)), SplitError);

    std::vector<double> cif(60, 5.0);
    CHECK(split_train_validation(make(cif, 12, 12)).validation_target.size() == 12);
}

TEST_CASE("median oracle") {
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
}

TEST_CASE("manifest loading resolves files next to the manifest") {
    auto dir = std::filesystem::temp_directory_path() / "rnnfc_manifest_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "a.csv") << "x,1,,3\n";
    std::ofstream(dir / "m.json") << R"({"name":"t","period":1,"horizon":1,"files":["a.csv"],"imputation":"zero-fill"})";
    auto m = read_manifest(dir / "m.json");
    auto c = load_manifest(m);
    CHECK(c.name == "t");
    CHECK(c.series[0].values == std::vector<double>{1, 0, 3});
}
