#include "rnnfc/error.hpp"
#include "rnnfc/metrics.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace rnnfc;
using V = std::vector<double>;

TEST_CASE("smape") {
    CHECK(smape(V{3}, V{1}) == Catch::Approx(100.0));
    CHECK(smape(V{1, 2}, V{1, 2}) == 0.0);
    CHECK_THROWS_AS(smape(V{0}, V{0}), UndefinedMetricError);
    CHECK_THROWS_AS(smape(V{1, 2}, V{1}), ShapeError);
}

TEST_CASE("modified smape") {
    CHECK(smape_modified(V{0}, V{0}) == 0.0);
    CHECK(smape_modified(V{1}, V{0}) == Catch::Approx(100.0 * 2.0 / 1.1));
    CHECK(smape_modified(V{1}, V{0}, 0.1, false) == Catch::Approx(100.0 / 1.1));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.5, 50.0);
    for (int i = 0; i < 100; ++i) {
        V f{u(rng)}, y{u(rng)};
        // When |Y|+|F| >= 0.5 only the epsilon separates the two.
        const double expect = 100.0 * std::abs(f[0] - y[0]) / ((std::abs(f[0]) + std::abs(y[0]) + 0.1) / 2.0);
        CHECK(smape_modified(f, y) == Catch::Approx(expect).epsilon(1e-12));
        CHECK(smape_modified(f, y, 0.0) == Catch::Approx(smape(f, y)).epsilon(1e-12));
    }
}

TEST_CASE("mase") {
    CHECK_THROWS_AS(mase(V{1}, V{1}, V{1, 2, 1, 2}, 2), UndefinedMetricError);
    CHECK_THROWS_AS(mase(V{1}, V{1}, V{1, 2, 1, 2}, 4), UndefinedMetricError);
    CHECK(mase(V{16}, V{16}, V{1, 2, 4, 8}, 1) == 0.0);
    CHECK(mase(V{3}, V{4}, V{0, 1, 0, 1, 3}, 1) == Catch::Approx(0.8));
    const V in{3, 7, 2, 9, 4, 6}, f{5, 1}, y{4, 8};
    const double base = mase(f, y, in, 2);
    V in2, f2, y2;
    for (double v : in) in2.push_back(7.5 * v);
    for (double v : f) f2.push_back(7.5 * v);
    for (double v : y) y2.push_back(7.5 * v);
    CHECK(mase(f2, y2, in2, 2) == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("aggregate") {
    std::vector<std::optional<double>> v{10.0, 20.0, 90.0};
    auto s = aggregate(v);
    CHECK(s.mean == Catch::Approx(40.0));
    CHECK(s.median == 20.0);
    CHECK(s.count == 3);
    v.push_back(std::nullopt);
    CHECK(aggregate(v).skipped == 1);
    CHECK(aggregate(v).mean == Catch::Approx(40.0));
    std::vector<std::optional<double>> none{std::nullopt, std::nullopt};
    CHECK_THROWS_AS(aggregate(none), AggregationError);
}

TEST_CASE("evaluate marks undefined metrics per series") {
    std::vector<EvaluationInput> in{{"a", {3}, {1}, {1, 2, 3}, 1}, {"b", {0}, {0}, {5, 5, 5}, 1}};
    auto r = evaluate("m", in);
    REQUIRE(r.per_series.size() == 2);
    CHECK(*r.per_series[0].smape == Catch::Approx(100.0));
    CHECK(*r.per_series[0].mase == Catch::Approx(2.0));
    CHECK_FALSE(r.per_series[1].smape);
    CHECK_FALSE(r.per_series[1].mase);
    REQUIRE(r.smape);
    CHECK(r.smape->skipped == 1);
}

TEST_CASE("rank models") {
    using T = std::map<std::string, double>;
    CHECK(rank_models({T{{"x", 1.0}}, T{{"x", 2.0}}}) == std::vector<double>{1.0, 2.0});
    CHECK(rank_models({T{{"x", 1.0}}, T{{"x", 1.0}}}) == std::vector<double>{1.5, 1.5});
    CHECK(rank_models({T{{"x", 3.0}}, T{{"x", 3.0}}, T{{"x", 3.0}}}) == std::vector<double>{2.0, 2.0, 2.0});
    CHECK(rank_models({T{{"x", 1.0}, {"y", 5.0}}, T{{"x", 2.0}, {"y", 4.0}}}) == std::vector<double>{1.5, 1.5});
    CHECK_THROWS_AS(rank_models({T{{"x", 1.0}}, T{{"y", 1.0}}}), ContractError);
    CHECK_THROWS_AS(rank_models({}), ContractError);
}
