#include "rnnfc/error.hpp"
#include "rnnfc/gradcheck.hpp"
#include "rnnfc/network.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace rnnfc;
using namespace rnnfc::grad;

namespace {

void randomize(ParameterSet& ps, std::uint64_t seed, double scale = 0.4) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    for (auto& p : ps) {
        for (auto& v : p.value.data()) {
            v = g(rng);
        }
    }
}

TimeSeries toy_series(const std::string& id, std::size_t n, double phase) {
    TimeSeries s;
    s.id = id;
    s.period = 4;
    s.horizon = 3;
    for (std::size_t t = 0; t < n; ++t) {
        s.values.push_back(10.0 + 0.1 * t + 2.0 * std::sin(2 * M_PI * t / 4 + phase));
    }
    return s;
}

} // namespace

TEST_CASE("architecture names round-trip") {
    for (auto a : {Architecture::StackedMW, Architecture::S2SDecoderNMW, Architecture::S2SDDenseNMW,
                   Architecture::S2SDDenseMW}) {
        CHECK(parse_architecture(to_string(a)) == a);
    }
    CHECK_THROWS_AS(parse_architecture("bogus"), ParseError);
}

TEST_CASE("stacked error accumulates per-step MAE") {
    Network net({Architecture::StackedMW, CellKind::Gru, 2, 3, 1, 2});
    // All parameters zero: every prediction is 0.
    Tape t;
    auto r = net.stacked_forward(t, {{0, 0}, {0, 0}}, {std::vector<double>{1, -1}, std::vector<double>{3, -3}});
    CHECK(t.scalar(r.error) == 4.0);

    Tape t2;
    auto p = net.stacked_forward(t2, {{0.5, 0.1}}, {std::vector<double>{0, 0}});
    CHECK(t2.scalar(p.error) == 0.0);
}

TEST_CASE("regularized loss") {
    ParameterSet ps;
    ps.add("w", 1, 1).value[0] = 2.0;
    CHECK(regularized_loss(1.0, ps, 0.1) == Catch::Approx(1.4));
    CHECK(regularized_loss(1.0, ps, 0.0) == 1.0);
    Tape t;
    std::vector<double> one{1.0};
    CHECK(t.scalar(regularized_loss(t, t.sum(t.constant(one)), ps, 0.1)) == Catch::Approx(1.4));
    ps.at("w").value[0] = 4.0;
    CHECK(regularized_loss(0.0, ps, 0.1) == Catch::Approx(4 * 0.4));
}

TEST_CASE("input noise") {
    std::vector<double> x{1, 2, 3};
    std::mt19937_64 rng(1);
    CHECK(inject_input_noise(x, 0.0, rng) == x);
    std::mt19937_64 a(9), b(9);
    CHECK(inject_input_noise(x, 0.3, a) == inject_input_noise(x, 0.3, b));
    std::vector<double> zeros(100000, 0.0);
    std::mt19937_64 c(2);
    auto noisy = inject_input_noise(zeros, 0.5, c);
    double mean = 0.0;
    for (double v : noisy) {
        mean += v;
    }
    mean /= static_cast<double>(noisy.size());
    CHECK(std::abs(mean) < 3 * 0.5 / std::sqrt(1e5));
}

TEST_CASE("decoder: H=1 modes agree, zero error on perfect predictions") {
    Network net({Architecture::S2SDecoderNMW, CellKind::LstmPeephole, 1, 3, 1, 1});
    net.initialize(0.5, 4);
    std::vector<double> enc{0.1, -0.3, 0.2};
    Tape t;
    auto tf = net.s2s_decoder_forward(t, enc, std::vector<double>{0.7}, DecoderMode::TeacherForced);
    auto ar = net.s2s_decoder_forward(t, enc, std::vector<double>{0.7}, DecoderMode::Autoregressive);
    CHECK(t.scalar(tf.predictions[0]) == t.scalar(ar.predictions[0]));

    const double pred = t.scalar(ar.predictions[0]);
    Tape t2;
    auto perfect = net.s2s_decoder_forward(t2, enc, std::vector<double>{pred}, DecoderMode::TeacherForced);
    CHECK(t2.scalar(perfect.error) == 0.0);
    Tape t3;
    CHECK_THROWS_AS(net.s2s_decoder_forward(t3, enc, std::nullopt, DecoderMode::TeacherForced), ContractError);
}

TEST_CASE("decoder matches a hand-unrolled ERNN encoder-decoder") {
    Network net({Architecture::S2SDecoderNMW, CellKind::Elman, 1, 2, 1, 2});
    randomize(net.parameters(), 12);
    auto& ps = net.parameters();
    auto M = [&](const std::string& n) {
        const auto& v = ps.at(n).value;
        Eigen::MatrixXd m(v.rows(), v.cols());
        for (std::size_t r = 0; r < v.rows(); ++r) {
            for (std::size_t c = 0; c < v.cols(); ++c) {
                m(r, c) = v(r, c);
            }
        }
        return m;
    };
    auto sig = [](Eigen::VectorXd v) { return Eigen::VectorXd((1.0 + (-v.array()).exp()).inverse()); };
    auto step = [&](const std::string& pre, Eigen::VectorXd h, double x, Eigen::VectorXd& z) {
        Eigen::VectorXd xv(1);
        xv << x;
        h = sig(M(pre + "W_i") * h + M(pre + "V_i") * xv + M(pre + "b_i"));
        z = (M(pre + "W_o") * h + M(pre + "b_o")).array().tanh().matrix();
        return h;
    };
    std::vector<double> enc{0.3, -0.5, 0.1};
    Eigen::VectorXd h = Eigen::VectorXd::Zero(2), z;
    for (double x : enc) {
        h = step("enc/l0/", h, x, z);
    }
    double prev = enc.back();
    std::vector<double> expect;
    for (int k = 0; k < 2; ++k) {
        h = step("dec/l0/", h, prev, z);
        const double y = (M("dec_proj/W") * z + M("dec_proj/b"))(0);
        expect.push_back(y);
        prev = y;
    }
    Tape t;
    auto r = net.s2s_decoder_forward(t, enc, std::nullopt, DecoderMode::Autoregressive);
    CHECK(t.scalar(r.predictions[0]) == Catch::Approx(expect[0]).margin(1e-12));
    CHECK(t.scalar(r.predictions[1]) == Catch::Approx(expect[1]).margin(1e-12));
}

TEST_CASE("dense S2SD with one block equals stacked with zero projection bias") {
    NetworkSpec spec{Architecture::S2SDDenseMW, CellKind::Gru, 3, 4, 2, 2};
    Network dense(spec);
    randomize(dense.parameters(), 31);
    spec.architecture = Architecture::StackedMW;
    Network stacked(spec);
    for (auto& p : stacked.parameters()) {
        if (const auto* q = dense.parameters().find(p.name)) {
            p.value = q->value;
        }
    }
    stacked.parameters().at("proj/b").value.fill(0.0);
    std::vector<std::vector<double>> in{{0.2, -0.1, 0.4}};
    std::vector<double> target{0.5, 0.25};
    Tape a, b;
    auto rd = dense.s2sd_forward(a, in, target);
    auto rs = stacked.stacked_forward(b, in, {target});
    auto va = a.value(rd.predictions[0]);
    auto vb = b.value(rs.predictions[0]);
    CHECK(std::vector<double>(va.begin(), va.end()) == std::vector<double>(vb.begin(), vb.end()));
    CHECK(a.scalar(rd.error) == b.scalar(rs.error));
}

TEST_CASE("every architecture forecasts H values and its training loss passes a gradient check") {
    std::vector<TimeSeries> series{toy_series("a", 22, 0.0), toy_series("b", 24, 1.0), toy_series("c", 23, 2.0)};
    for (auto arch : {Architecture::StackedMW, Architecture::S2SDecoderNMW, Architecture::S2SDDenseNMW,
                      Architecture::S2SDDenseMW}) {
        INFO(to_string(arch));
        const auto fmt = input_format(arch);
        Network net({arch, CellKind::LstmPeephole, 5, 4, 1, 3});
        net.initialize(0.3, 77);
        std::vector<WindowSet> train;
        for (const auto& s : series) {
            train.push_back(preprocess_series(s, Pipeline::Stl, 5, 3, Stage::Train, fmt));
            auto test = preprocess_series(s, Pipeline::Stl, 5, 3, Stage::Test, fmt);
            CHECK(net.forecast(test).size() == 3);
        }
        auto f = tape_objective([&](Tape& t, ParameterSet&) {
            std::mt19937_64 rng(0);
            Var total;
            for (const auto& ws : train) {
                Var e = net.training_error(t, ws, 0.0, rng);
                total = total.valid() ? t.add(total, e) : e;
            }
            return regularized_loss(t, total, net.parameters(), 1e-3);
        });
        CHECK(finite_difference_check(f, net.parameters()).max_relative_error < 1e-4);
    }
}

TEST_CASE("format mismatch and wrong stage are contract errors") {
    auto s = toy_series("a", 24, 0.0);
    Network net({Architecture::StackedMW, CellKind::Gru, 5, 2, 1, 3});
    auto seq = preprocess_series(s, Pipeline::Stl, 5, 3, Stage::Train, InputFormat::Sequence);
    auto val = preprocess_series(s, Pipeline::Stl, 5, 3, Stage::Validation);
    Tape t;
    std::mt19937_64 rng(0);
    CHECK_THROWS_AS(net.training_error(t, seq, 0.0, rng), ContractError);
    CHECK_THROWS_AS(net.training_error(t, val, 0.0, rng), ContractError);
}

TEST_CASE("parameter count includes the projection") {
    Network stacked({Architecture::StackedMW, CellKind::Gru, 10, 20, 1, 12});
    CHECK(stacked.parameter_count() == 1860 + 12 * 20 + 12);
    Network dense({Architecture::S2SDDenseNMW, CellKind::Gru, 10, 20, 1, 12});
    CHECK(dense.parameter_count() == param_count(CellKind::Gru, 1, 20, 1) + 12 * 20);
}

TEST_CASE("initialization: zero biases, seeded weights") {
    Network a({Architecture::StackedMW, CellKind::LstmPeephole, 3, 4, 2, 2});
    Network b({Architecture::StackedMW, CellKind::LstmPeephole, 3, 4, 2, 2});
    a.initialize(0.1, 5);
    b.initialize(0.1, 5);
    CHECK(a.parameters().flat_values() == b.parameters().flat_values());
    for (const auto& p : a.parameters()) {
        if (p.name.find("/b") != std::string::npos) {
            for (double v : p.value.data()) {
                CHECK(v == 0.0);
            }
        }
    }
}
