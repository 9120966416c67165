#include "rnnfc/error.hpp"
#include "rnnfc/preprocess.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace rnnfc;

namespace {

TimeSeries seasonal_series(std::size_t n, int period, int horizon, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, noise);
    TimeSeries s;
    s.id = "x";
    s.period = period;
    s.horizon = horizon;
    for (std::size_t t = 0; t < n; ++t) {
        s.values.push_back((20.0 + 0.05 * t) * (1.0 + 0.2 * std::sin(2 * M_PI * t / period)) * (1.0 + g(rng)));
    }
    return s;
}

} // namespace

TEST_CASE("log transform rule") {
    auto a = log_transform(std::vector<double>{std::exp(1.0), std::exp(2.0)}, 0.001);
    CHECK(a.log_offset == 0);
    CHECK(a.values[0] == Catch::Approx(1.0).margin(1e-15));
    CHECK(a.values[1] == Catch::Approx(2.0).margin(1e-15));

    auto b = log_transform(std::vector<double>{0.0, 1.0}, 0.0);
    CHECK(b.log_offset == 1);
    CHECK(b.values[0] == 0.0);
    CHECK(b.values[1] == Catch::Approx(std::log1p(1.0)).margin(1e-15));

    CHECK_THROWS_AS(log_transform(std::vector<double>{-1.0, 2.0}, 0.0), DomainError);
}

TEST_CASE("mean scaling") {
    auto a = mean_scale(std::vector<double>{2, 4});
    CHECK(a.mean == 3.0);
    CHECK(a.values[0] == Catch::Approx(2.0 / 3.0));
    CHECK(a.values[1] == Catch::Approx(4.0 / 3.0));
    auto c = mean_scale(std::vector<double>{5, 5, 5});
    CHECK(c.values == std::vector<double>{1, 1, 1});
    CHECK_THROWS_AS(mean_scale(std::vector<double>{0, 0}), ScalingError);
}

TEST_CASE("input window options and fallback") {
    CHECK(input_window_options(56, 7) == std::pair{70, 9});
    CHECK(input_window_options(12, 12) == std::pair{15, 15});
    // A short horizon-6 monthly series: neither 8 nor 15 leaves a training block, so the
    // largest feasible size is used.
    CHECK(choose_input_window_size(6, 12, 20, WindowVariant::Small) == 7);
    CHECK(choose_input_window_size(12, 12, 120, WindowVariant::Large) == 15);
    CHECK(choose_input_window_size(56, 7, 735, WindowVariant::Small) == 9);
    CHECK(choose_input_window_size(56, 7, 735, WindowVariant::Large) == 70);
    CHECK_THROWS_AS(choose_input_window_size(6, 12, 12, WindowVariant::Small), SizingError);
}

TEST_CASE("block counts follow the formulas") {
    std::vector<double> v(100, 1.0);
    CHECK(build_windows(v, 10, 7, Stage::Train).blocks.size() == 76);
    CHECK(build_windows(v, 10, 7, Stage::Validation).blocks.size() == 83);
    CHECK(build_windows(v, 10, 7, Stage::Test).blocks.size() == 1);
    std::vector<double> tight(17, 1.0);
    CHECK_THROWS_AS(build_windows(tight, 10, 7, Stage::Validation), SizingError);
    CHECK_THROWS_WITH(build_windows(tight, 10, 7, Stage::Validation), Catch::Matchers::ContainsSubstring("18"));
}

TEST_CASE("consecutive blocks shift by one and train targets stay out of the held-out region") {
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<double>(i);
    }
    auto ws = build_windows(v, 5, 3, Stage::Train);
    for (std::size_t k = 1; k < ws.blocks.size(); ++k) {
        CHECK(ws.blocks[k].input.front() == ws.blocks[k - 1].input.front() + 1);
    }
    CHECK(ws.blocks.back().target->back() < 40 - 3);

    auto val = build_windows(v, 5, 3, Stage::Validation);
    CHECK(*val.blocks.back().target == std::vector<double>{37, 38, 39});
    for (std::size_t k = 0; k + 1 < val.blocks.size(); ++k) {
        if (val.blocks[k].target) {
            CHECK(val.blocks[k].target->back() < 37);
        }
    }

    auto test = build_windows(v, 5, 3, Stage::Test);
    CHECK(test.blocks.front().input == std::vector<double>{35, 36, 37, 38, 39});
    CHECK(!test.blocks.front().target);
    CHECK(test.warmup.size() == 40 - 5 - 1);
}

TEST_CASE("trend normalization subtracts the anchor") {
    Decomposition d;
    d.trend = {0, 0, 12};
    d.seasonal = {0, 0, 0};
    d.remainder = {0, 0, 0};
    WindowBlock b;
    b.input = {10, 11, 12};
    b.target = std::vector<double>{13, 14};
    trend_normalize(b, d, 2);
    CHECK(b.input == std::vector<double>{-2, -1, 0});
    CHECK(*b.target == std::vector<double>{1, 2});
    CHECK(*b.record.trend_anchor == 12.0);
}

TEST_CASE("postprocess examples") {
    NormalizationRecord r;
    r.pipeline = Pipeline::Stl;
    r.trend_anchor = 2.0;
    r.seasonal_future = std::vector<double>{1.0};
    CHECK(postprocess_forecast(std::vector<double>{0.0}, r, false)[0] == Catch::Approx(std::exp(3.0)).epsilon(1e-12));

    // A value reversing to -0.4 on integer data: rounds to -0, clips to 0.
    NormalizationRecord n;
    n.pipeline = Pipeline::NoStl;
    n.series_mean = 1.0;
    n.log_offset = 1;
    auto out = postprocess_forecast(std::vector<double>{std::log(0.6)}, n, true);
    CHECK(out[0] == 0.0);
    CHECK(!std::signbit(out[0]));

    // Half away from zero.
    n.log_offset = 0;
    CHECK(postprocess_forecast(std::vector<double>{std::log(2.5)}, n, true)[0] == 3.0);

    NormalizationRecord broken;
    broken.pipeline = Pipeline::Stl;
    CHECK_THROWS_AS(postprocess_forecast(std::vector<double>{0.0}, broken, false), ContractError);
}

TEST_CASE("NOSTL composition on [2, 4]") {
    TimeSeries s;
    s.id = "a";
    s.values = {2, 4, 2, 4, 2, 4};
    s.horizon = 1;
    auto ws = preprocess_series(s, Pipeline::NoStl, 2, 1, Stage::Refit);
    CHECK(*ws.blocks.front().record.series_mean == 3.0);
    CHECK(ws.blocks.front().input[0] == Catch::Approx(std::log(4.0 / 3.0)));
    CHECK(ws.blocks.front().record.log_offset == 0);
}

TEST_CASE("preprocessed ground truth reverses to the original future") {
    for (auto pipeline : {Pipeline::Stl, Pipeline::NoStl}) {
        auto s = seasonal_series(84, 12, 12, 0.05, 5);
        auto val = preprocess_series(s, pipeline, 15, 12, Stage::Validation);
        const auto& last = val.blocks.back();
        auto back = postprocess_forecast(*last.target, last.record, false);
        for (std::size_t k = 0; k < 12; ++k) {
            CHECK(back[k] == Catch::Approx(s.values[72 + k]).epsilon(1e-9));
        }
        auto fwd = normalize_future(std::span(s.values).subspan(72), last.record);
        for (std::size_t k = 0; k < 12; ++k) {
            CHECK(fwd[k] == Catch::Approx((*last.target)[k]).margin(1e-12));
        }
    }
}

TEST_CASE("test stage yields one block per series; sequence format holds one encoder sequence") {
    auto s = seasonal_series(60, 12, 6, 0.0, 1);
    CHECK(preprocess_series(s, Pipeline::Stl, 8, 6, Stage::Test).blocks.size() == 1);
    auto seq = preprocess_series(s, Pipeline::Stl, 0, 6, Stage::Train, InputFormat::Sequence);
    REQUIRE(seq.blocks.size() == 1);
    CHECK(seq.blocks[0].input.size() == 48);
    CHECK(seq.blocks[0].target->size() == 6);
    CHECK(seq.blocks[0].record.trend_anchor.has_value());
    CHECK(seq.blocks[0].record.seasonal_future->size() == 6);
}

TEST_CASE("flat trend shift leaves normalized windows unchanged") {
    auto s = seasonal_series(72, 12, 6, 0.02, 9);
    auto shifted = s;
    for (auto& v : shifted.values) {
        v *= std::exp(0.7);  // adds 0.7 to the log-scale trend
    }
    auto a = preprocess_series(s, Pipeline::Stl, 8, 6, Stage::Train);
    auto b = preprocess_series(shifted, Pipeline::Stl, 8, 6, Stage::Train);
    for (std::size_t k = 0; k < a.blocks.size(); ++k) {
        for (std::size_t j = 0; j < a.blocks[k].input.size(); ++j) {
            CHECK(a.blocks[k].input[j] == Catch::Approx(b.blocks[k].input[j]).margin(1e-9));
        }
    }
}

TEST_CASE("series errors name the series") {
    TimeSeries s;
    s.id = "neg";
    s.values = {1, -2, 3, 4, 5, 6, 7, 8};
    s.horizon = 1;
    CHECK_THROWS_WITH(preprocess_series(s, Pipeline::Stl, 2, 1, Stage::Train), Catch::Matchers::ContainsSubstring("neg"));
}
