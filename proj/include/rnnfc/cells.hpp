#pragma once

#include "rnnfc/tape.hpp"

#include <cstdint>
#include <string>

namespace rnnfc {

enum class CellKind { Elman, LstmPeephole, Gru };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(const std::string& name);

struct CellState {
    grad::Var h;
    grad::Var c;  // LSTM only
};

struct StepResult {
    CellState state;
    grad::Var output;
};

// Weight handles bound to one tape. W_* act on the previous hidden state (d x d),
// V_* on the input (d x m), b_* are biases, P_* are diagonal peephole vectors.

struct ElmanWeights {
    grad::Var W_i, V_i, b_i, W_o, b_o;
};

struct LstmWeights {
    grad::Var W_i, V_i, b_i, P_i;
    grad::Var W_o, V_o, b_o, P_o;
    grad::Var W_f, V_f, b_f, P_f;
    grad::Var W_c, V_c, b_c;
};

struct GruWeights {
    grad::Var W_u, V_u, b_u;
    grad::Var W_r, V_r, b_r;
    grad::Var W_h, V_h, b_h;
};

/// h' = sigmoid(W_i h + V_i x + b_i), z = tanh(W_o h' + b_o)
StepResult ernn_step(grad::Tape& tape, const ElmanWeights& w, const CellState& state, grad::Var x);

/// Peephole LSTM; the output gate peeks at the updated cell state, z = h'.
StepResult lstm_peephole_step(grad::Tape& tape, const LstmWeights& w, const CellState& state, grad::Var x);

/// h' = u * tanh(W_h (r * h) + V_h x + b_h) + (1 - u) * h, z = h'.
StepResult gru_step(grad::Tape& tape, const GruWeights& w, const CellState& state, grad::Var x);

/// Registers the tensors of one layer under `prefix` (e.g. "enc/l0/").
void add_cell_parameters(grad::ParameterSet& params, const std::string& prefix, CellKind kind, int input_size,
                         int dim);

/// One recurrent layer whose parameters are bound to a tape.
class BoundCell {
public:
    BoundCell(grad::Tape& tape, grad::ParameterSet& params, const std::string& prefix, CellKind kind, int input_size,
              int dim);

    CellState zero_state() const;
    StepResult step(const CellState& state, grad::Var x) const;

    CellKind kind() const { return kind_; }
    int dim() const { return dim_; }

private:
    grad::Tape* tape_;
    CellKind kind_;
    int input_size_;
    int dim_;
    ElmanWeights elman_{};
    LstmWeights lstm_{};
    GruWeights gru_{};
};

/// Weights of the recurrent core for `layers` stacked layers (layer 1 sees m inputs, the
/// rest see d). Excludes any output projection.
std::int64_t param_count(CellKind kind, int input_size, int dim, int layers);

/// Largest d whose core parameter count fits the budget.
int dim_from_param_budget(CellKind kind, int input_size, int layers, std::int64_t budget);

} // namespace rnnfc
