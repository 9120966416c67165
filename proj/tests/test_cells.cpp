#include "rnnfc/cells.hpp"
#include "rnnfc/error.hpp"
#include "rnnfc/gradcheck.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <random>

using namespace rnnfc;
using namespace rnnfc::grad;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kM = 3;
constexpr int kD = 4;

void randomize(ParameterSet& ps, std::uint64_t seed, double scale = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    for (auto& p : ps) {
        for (auto& v : p.value.data()) {
            v = g(rng);
        }
    }
}

MatrixXd mat(const ParameterSet& ps, const std::string& name) {
    const auto& t = ps.at(name).value;
    MatrixXd m(t.rows(), t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
            m(r, c) = t(r, c);
        }
    }
    return m;
}

VectorXd sig(const VectorXd& v) { return (1.0 + (-v.array()).exp()).inverse().matrix(); }
VectorXd th(const VectorXd& v) { return v.array().tanh().matrix(); }

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> values(const Tape& t, Var v) {
    auto s = t.value(v);
    return {s.begin(), s.end()};
}

void check_close(const std::vector<double>& a, const VectorXd& b) {
    REQUIRE(a.size() == static_cast<std::size_t>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == Catch::Approx(b(static_cast<Eigen::Index>(i))).margin(1e-12));
    }
}

} // namespace

TEST_CASE("cells match dense-math oracles over several steps") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> xs(3, std::vector<double>(kM));
    for (auto& x : xs) {
        for (auto& v : x) {
            v = g(rng);
        }
    }
    for (auto kind : {CellKind::Elman, CellKind::LstmPeephole, CellKind::Gru}) {
        INFO(to_string(kind));
        ParameterSet ps;
        add_cell_parameters(ps, "", kind, kM, kD);
        randomize(ps, 17);
        Tape t;
        BoundCell cell(t, ps, "", kind, kM, kD);
        CellState s = cell.zero_state();
        VectorXd h = VectorXd::Zero(kD);
        VectorXd c = VectorXd::Zero(kD);
        for (const auto& xv : xs) {
            StepResult r = cell.step(s, t.constant(xv));
            s = r.state;
            VectorXd x = Eigen::Map<const VectorXd>(xv.data(), kM);
            VectorXd z;
            auto W = [&](const char* n) { return mat(ps, n); };
            switch (kind) {
            case CellKind::Elman:
                h = sig(W("W_i") * h + W("V_i") * x + W("b_i"));
                z = th(W("W_o") * h + W("b_o"));
                break;
            case CellKind::LstmPeephole: {
                VectorXd i = sig(W("W_i") * h + W("V_i") * x + W("P_i").cwiseProduct(c) + W("b_i"));
                VectorXd f = sig(W("W_f") * h + W("V_f") * x + W("P_f").cwiseProduct(c) + W("b_f"));
                VectorXd cand = th(W("W_c") * h + W("V_c") * x + W("b_c"));
                c = i.cwiseProduct(cand) + f.cwiseProduct(c);
                VectorXd o = sig(W("W_o") * h + W("V_o") * x + W("P_o").cwiseProduct(c) + W("b_o"));
                h = o.cwiseProduct(th(c));
                z = h;
                break;
            }
            case CellKind::Gru: {
                VectorXd u = sig(W("W_u") * h + W("V_u") * x + W("b_u"));
                VectorXd r2 = sig(W("W_r") * h + W("V_r") * x + W("b_r"));
                VectorXd cand = th(W("W_h") * r2.cwiseProduct(h) + W("V_h") * x + W("b_h"));
                h = u.cwiseProduct(cand) + (VectorXd::Ones(kD) - u).cwiseProduct(h);
                z = h;
                break;
            }
            }
            check_close(values(t, r.output), z);
            check_close(values(t, r.state.h), h);
        }
    }
}

TEST_CASE("zero-parameter cells") {
    std::vector<double> x{0.0};
    {
        ParameterSet ps;
        add_cell_parameters(ps, "", CellKind::Elman, 1, 2);
        Tape t;
        BoundCell cell(t, ps, "", CellKind::Elman, 1, 2);
        auto r = cell.step(cell.zero_state(), t.constant(x));
        CHECK(values(t, r.state.h) == std::vector<double>{0.5, 0.5});
        CHECK(values(t, r.output) == std::vector<double>{0.0, 0.0});
    }
    for (auto kind : {CellKind::LstmPeephole, CellKind::Gru}) {
        ParameterSet ps;
        add_cell_parameters(ps, "", kind, 1, 2);
        Tape t;
        BoundCell cell(t, ps, "", kind, 1, 2);
        auto r = cell.step(cell.zero_state(), t.constant(x));
        CHECK(values(t, r.state.h) == std::vector<double>{0.0, 0.0});
    }
}

TEST_CASE("ERNN single unit: V_i=1, x=0 gives 0.5") {
    ParameterSet ps;
    add_cell_parameters(ps, "", CellKind::Elman, 1, 1);
    ps.at("V_i").value[0] = 1.0;
    Tape t;
    BoundCell cell(t, ps, "", CellKind::Elman, 1, 1);
    std::vector<double> x{0.0};
    CHECK(t.scalar(cell.step(cell.zero_state(), t.constant(x)).state.h) == 0.5);
}

TEST_CASE("GRU with a closed update gate freezes the state") {
    ParameterSet ps;
    add_cell_parameters(ps, "", CellKind::Gru, 2, 3);
    randomize(ps, 3);
    ps.at("b_u").value.fill(-800.0);
    ps.at("W_u").value.fill(0.0);
    ps.at("V_u").value.fill(0.0);
    Tape t;
    BoundCell cell(t, ps, "", CellKind::Gru, 2, 3);
    std::vector<double> h0{0.3, -0.1, 0.7};
    std::vector<double> x{1.0, 2.0};
    CellState s{t.constant(h0), {}};
    CHECK(values(t, cell.step(s, t.constant(x)).state.h) == h0);
}

TEST_CASE("peephole LSTM with zero peepholes equals the vanilla LSTM bit for bit") {
    ParameterSet ps;
    add_cell_parameters(ps, "", CellKind::LstmPeephole, kM, kD);
    randomize(ps, 23);
    for (const char* p : {"P_i", "P_o", "P_f"}) {
        ps.at(p).value.fill(0.0);
    }
    std::vector<double> xv{0.4, -1.2, 0.8};
    Tape t;
    BoundCell cell(t, ps, "", CellKind::LstmPeephole, kM, kD);
    auto s0 = cell.zero_state();
    std::vector<double> c0{0.2, -0.3, 0.5, 0.1};
    s0.c = t.constant(c0);
    Var x = t.constant(xv);
    auto r = cell.step(s0, x);

    auto P = [&](const char* n) { return t.parameter(ps.at(n)); };
    auto gate = [&](const char* W, const char* V, const char* b) {
        return t.add(t.affine(P(W), s0.h, P(b)), t.affine(P(V), x));
    };
    Var i = t.sigmoid(gate("W_i", "V_i", "b_i"));
    Var f = t.sigmoid(gate("W_f", "V_f", "b_f"));
    Var cand = t.tanh(gate("W_c", "V_c", "b_c"));
    Var c = t.add(t.hadamard(i, cand), t.hadamard(f, s0.c));
    Var o = t.sigmoid(gate("W_o", "V_o", "b_o"));
    Var h = t.hadamard(o, t.tanh(c));
    CHECK(values(t, r.state.h) == values(t, h));
    CHECK(values(t, r.state.c) == values(t, c));
}

TEST_CASE("cell input size is checked") {
    ParameterSet ps;
    add_cell_parameters(ps, "", CellKind::Gru, 3, 2);
    Tape t;
    BoundCell cell(t, ps, "", CellKind::Gru, 3, 2);
    std::vector<double> x{1.0};
    CHECK_THROWS_AS(cell.step(cell.zero_state(), t.constant(x)), ShapeError);
}

TEST_CASE("five unrolled steps pass the gradient check for every cell") {
    std::vector<std::vector<double>> xs;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        xs.push_back({g(rng), g(rng), g(rng)});
    }
    for (auto kind : {CellKind::Elman, CellKind::LstmPeephole, CellKind::Gru}) {
        INFO(to_string(kind));
        ParameterSet ps;
        add_cell_parameters(ps, "", kind, kM, kD);
        randomize(ps, 99);
        auto f = tape_objective([&](Tape& t, ParameterSet& p) {
            BoundCell cell(t, p, "", kind, kM, kD);
            CellState s = cell.zero_state();
            Var loss;
            for (const auto& x : xs) {
                auto r = cell.step(s, t.constant(x));
                s = r.state;
                Var term = t.sum_squares(r.output);
                loss = loss.valid() ? t.add(loss, term) : term;
            }
            return loss;
        });
        CHECK(finite_difference_check(f, ps).max_relative_error < 1e-4);
    }
}

TEST_CASE("parameter counts match an enumeration of the tensors") {
    CHECK(param_count(CellKind::Gru, 10, 20, 1) == 1860);
    CHECK(param_count(CellKind::LstmPeephole, 10, 20, 1) == 2540);
    CHECK(param_count(CellKind::Elman, 10, 20, 1) == 1040);
    for (auto kind : {CellKind::Elman, CellKind::LstmPeephole, CellKind::Gru}) {
        for (int layers : {1, 2, 3}) {
            ParameterSet ps;
            for (int l = 0; l < layers; ++l) {
                add_cell_parameters(ps, "l" + std::to_string(l) + "/", kind, l == 0 ? 7 : 5, 5);
            }
            CHECK(static_cast<std::int64_t>(ps.scalar_count()) == param_count(kind, 7, 5, layers));
        }
    }
}

TEST_CASE("dimension from a parameter budget") {
    CHECK(dim_from_param_budget(CellKind::Gru, 10, 1, 1860) == 20);
    CHECK(dim_from_param_budget(CellKind::Gru, 10, 1, 1859) == 19);
    CHECK_THROWS_AS(dim_from_param_budget(CellKind::Gru, 10, 1, 10), SizingError);
}
