#include "rnnfc/cells.hpp"

#include "rnnfc/error.hpp"

namespace rnnfc {

using grad::Tape;
using grad::Var;

std::string to_string(CellKind kind) {
    switch (kind) {
    case CellKind::Elman:
        return "ERNN";
    case CellKind::LstmPeephole:
        return "LSTM";
    case CellKind::Gru:
        return "GRU";
    }
    return "?";
}

CellKind parse_cell_kind(const std::string& name) {
    if (name == "ERNN" || name == "ernn" || name == "elman") {
        return CellKind::Elman;
    }
    if (name == "LSTM" || name == "lstm" || name == "LSTM_PEEPHOLE") {
        return CellKind::LstmPeephole;
    }
    if (name == "GRU" || name == "gru") {
        return CellKind::Gru;
    }
    throw ParseError("unknown cell kind '" + name + "'");
}

namespace {

// W h + V x + b
Var pre_activation(Tape& tape, Var W, Var h, Var V, Var x, Var b) {
    return tape.add(tape.affine(W, h, b), tape.affine(V, x));
}

void add_gate(grad::ParameterSet& params, const std::string& prefix, const std::string& gate, int in, int d) {
    auto ud = static_cast<std::size_t>(d);
    params.add(prefix + "W_" + gate, ud, ud);
    params.add(prefix + "V_" + gate, ud, static_cast<std::size_t>(in));
    params.add(prefix + "b_" + gate, ud, 1);
}

} // namespace

StepResult ernn_step(Tape& tape, const ElmanWeights& w, const CellState& state, Var x) {
    Var h = tape.sigmoid(pre_activation(tape, w.W_i, state.h, w.V_i, x, w.b_i));
    Var z = tape.tanh(tape.affine(w.W_o, h, w.b_o));
    return {CellState{h, {}}, z};
}

StepResult lstm_peephole_step(Tape& tape, const LstmWeights& w, const CellState& state, Var x) {
    Var i = tape.sigmoid(
        tape.add(pre_activation(tape, w.W_i, state.h, w.V_i, x, w.b_i), tape.hadamard(w.P_i, state.c)));
    Var f = tape.sigmoid(
        tape.add(pre_activation(tape, w.W_f, state.h, w.V_f, x, w.b_f), tape.hadamard(w.P_f, state.c)));
    Var candidate = tape.tanh(pre_activation(tape, w.W_c, state.h, w.V_c, x, w.b_c));
    Var c = tape.add(tape.hadamard(i, candidate), tape.hadamard(f, state.c));
    Var o = tape.sigmoid(tape.add(pre_activation(tape, w.W_o, state.h, w.V_o, x, w.b_o), tape.hadamard(w.P_o, c)));
    Var h = tape.hadamard(o, tape.tanh(c));
    return {CellState{h, c}, h};
}

StepResult gru_step(Tape& tape, const GruWeights& w, const CellState& state, Var x) {
    Var u = tape.sigmoid(pre_activation(tape, w.W_u, state.h, w.V_u, x, w.b_u));
    Var r = tape.sigmoid(pre_activation(tape, w.W_r, state.h, w.V_r, x, w.b_r));
    Var candidate = tape.tanh(pre_activation(tape, w.W_h, tape.hadamard(r, state.h), w.V_h, x, w.b_h));
    Var h = tape.add(tape.hadamard(u, candidate), tape.hadamard(tape.one_minus(u), state.h));
    return {CellState{h, {}}, h};
}

void add_cell_parameters(grad::ParameterSet& params, const std::string& prefix, CellKind kind, int input_size,
                         int dim) {
    if (input_size < 1 || dim < 1) {
        throw SizingError("cell needs input size and dimension >= 1");
    }
    auto ud = static_cast<std::size_t>(dim);
    switch (kind) {
    case CellKind::Elman:
        add_gate(params, prefix, "i", input_size, dim);
        params.add(prefix + "W_o", ud, ud);
        params.add(prefix + "b_o", ud, 1);
        break;
    case CellKind::LstmPeephole:
        for (const char* g : {"i", "o", "f", "c"}) {
            add_gate(params, prefix, g, input_size, dim);
        }
        for (const char* g : {"i", "o", "f"}) {
            params.add(prefix + "P_" + g, ud, 1);
        }
        break;
    case CellKind::Gru:
        for (const char* g : {"u", "r", "h"}) {
            add_gate(params, prefix, g, input_size, dim);
        }
        break;
    }
}

BoundCell::BoundCell(Tape& tape, grad::ParameterSet& params, const std::string& prefix, CellKind kind,
                     int input_size, int dim)
    : tape_(&tape), kind_(kind), input_size_(input_size), dim_(dim) {
    auto bind = [&](const std::string& name) { return tape.parameter(params.at(prefix + name)); };
    switch (kind) {
    case CellKind::Elman:
        elman_ = {bind("W_i"), bind("V_i"), bind("b_i"), bind("W_o"), bind("b_o")};
        break;
    case CellKind::LstmPeephole:
        lstm_ = {bind("W_i"), bind("V_i"), bind("b_i"), bind("P_i"), bind("W_o"), bind("V_o"),
                 bind("b_o"), bind("P_o"), bind("W_f"), bind("V_f"), bind("b_f"), bind("P_f"),
                 bind("W_c"), bind("V_c"), bind("b_c")};
        break;
    case CellKind::Gru:
        gru_ = {bind("W_u"), bind("V_u"), bind("b_u"), bind("W_r"), bind("V_r"),
                bind("b_r"), bind("W_h"), bind("V_h"), bind("b_h")};
        break;
    }
}

CellState BoundCell::zero_state() const {
    CellState s;
    s.h = tape_->zeros(static_cast<std::size_t>(dim_));
    if (kind_ == CellKind::LstmPeephole) {
        s.c = tape_->zeros(static_cast<std::size_t>(dim_));
    }
    return s;
}

StepResult BoundCell::step(const CellState& state, Var x) const {
    if (tape_->size(x) != static_cast<std::size_t>(input_size_)) {
        throw ShapeError("cell step: input of size " + std::to_string(tape_->size(x)) + ", expected " +
                         std::to_string(input_size_));
    }
    switch (kind_) {
    case CellKind::Elman:
        return ernn_step(*tape_, elman_, state, x);
    case CellKind::LstmPeephole:
        return lstm_peephole_step(*tape_, lstm_, state, x);
    case CellKind::Gru:
        return gru_step(*tape_, gru_, state, x);
    }
    throw ContractError("unknown cell kind");
}

std::int64_t param_count(CellKind kind, int input_size, int dim, int layers) {
    if (layers < 1) {
        throw SizingError("param_count: layers must be >= 1");
    }
    const std::int64_t d = dim;
    std::int64_t total = 0;
    for (int layer = 0; layer < layers; ++layer) {
        const std::int64_t in = layer == 0 ? input_size : dim;
        const std::int64_t gate = d * (d + in + 1);
        switch (kind) {
        case CellKind::Elman:
            total += gate + d * (d + 1);
            break;
        case CellKind::LstmPeephole:
            total += 4 * gate + 3 * d;
            break;
        case CellKind::Gru:
            total += 3 * gate;
            break;
        }
    }
    return total;
}

int dim_from_param_budget(CellKind kind, int input_size, int layers, std::int64_t budget) {
    if (budget < param_count(kind, input_size, 1, layers)) {
        throw SizingError("parameter budget " + std::to_string(budget) + " is below the cost of a dimension-1 " +
                          to_string(kind) + " cell");
    }
    // param_count is strictly increasing in d: exponential then binary search.
    int lo = 1;
    int hi = 2;
    while (param_count(kind, input_size, hi, layers) <= budget) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        if (param_count(kind, input_size, mid, layers) <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

} // namespace rnnfc
