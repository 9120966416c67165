#pragma once

#include "rnnfc/cells.hpp"
#include "rnnfc/preprocess.hpp"
#include "rnnfc/tape.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rnnfc {

/// The four architecture / input-format combinations.
enum class Architecture {
    StackedMW,      // dense layer per step, moving window, error accumulated over all steps
    S2SDecoderNMW,  // encoder-decoder, scalar inputs, error over the decoder steps
    S2SDDenseNMW,   // encoder + bias-free dense layer, scalar inputs, last-step error
    S2SDDenseMW     // encoder + bias-free dense layer, moving window, last-step error
};

std::string to_string(Architecture a);
Architecture parse_architecture(const std::string& name);
InputFormat input_format(Architecture a);

enum class DecoderMode { TeacherForced, Autoregressive };

struct NetworkSpec {
    Architecture architecture = Architecture::StackedMW;
    CellKind cell = CellKind::LstmPeephole;
    int input_size = 1;  // m for moving-window architectures; forced to 1 otherwise
    int cell_dim = 1;
    int layers = 1;
    int horizon = 1;
};

struct ForwardResult {
    /// StackedMW: one H-vector per step. S2SD: a single H-vector. Decoder: H scalars.
    std::vector<grad::Var> predictions;
    /// Accumulated training error; invalid when no targets were supplied.
    grad::Var error;
};

/// i.i.d. Normal(0, sigma^2) added to every element; sigma == 0 returns the input unchanged
/// and leaves `rng` untouched.
std::vector<double> inject_input_noise(std::span<const double> inputs, double sigma, std::mt19937_64& rng);

/// L = E + psi * sum of squares of every parameter (biases included), recorded on the tape.
grad::Var regularized_loss(grad::Tape& tape, grad::Var error, grad::ParameterSet& params, double psi);
double regularized_loss(double error, const grad::ParameterSet& params, double psi);

/// A global recurrent forecaster: one parameter set, state rebuilt per series.
class Network {
public:
    explicit Network(NetworkSpec spec);

    const NetworkSpec& spec() const { return spec_; }
    grad::ParameterSet& parameters() { return params_; }
    const grad::ParameterSet& parameters() const { return params_; }
    std::int64_t parameter_count() const { return static_cast<std::int64_t>(params_.scalar_count()); }

    /// Weights ~ Normal(0, init_sigma^2), biases 0.
    void initialize(double init_sigma, std::uint64_t seed);

    /// Stacked: each element of `inputs` is one step's window. `targets[t]` may be empty to
    /// skip that step's error. E = sum over steps of the mean absolute error.
    ForwardResult stacked_forward(grad::Tape& tape, const std::vector<std::vector<double>>& inputs,
                                  const std::vector<std::optional<std::vector<double>>>& targets);

    /// Encoder over scalar steps, decoder over H steps initialised from the encoder state.
    /// Teacher forcing needs `targets`; E = mean absolute error over the decoder outputs.
    ForwardResult s2s_decoder_forward(grad::Tape& tape, std::span<const double> encoder_inputs,
                                      const std::optional<std::vector<double>>& targets, DecoderMode mode);

    /// Encoder over step vectors; the last state is projected to H values. E = MAE of that vector.
    ForwardResult s2sd_forward(grad::Tape& tape, const std::vector<std::vector<double>>& inputs,
                               const std::optional<std::vector<double>>& target);

    /// Training error for one series' WindowSet (train or refit stage).
    grad::Var training_error(grad::Tape& tape, const WindowSet& windows, double noise_sigma, std::mt19937_64& rng);

    /// H normalized forecasts following the final block of a validation or test WindowSet.
    std::vector<double> forecast(const WindowSet& windows) const;

private:
    struct Stack {
        std::vector<BoundCell> layers;
        std::vector<CellState> states;
    };

    Stack bind_stack(grad::Tape& tape, const std::string& prefix, int input_size);
    grad::Var run_step(grad::Tape& tape, Stack& stack, grad::Var x);
    grad::Var run_encoder(grad::Tape& tape, Stack& stack, const std::vector<std::vector<double>>& inputs);
    std::vector<double> forecast_impl(const WindowSet& windows);

    NetworkSpec spec_;
    grad::ParameterSet params_;
};

} // namespace rnnfc
