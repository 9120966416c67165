#include "rnnfc/network.hpp"

#include "rnnfc/error.hpp"

namespace rnnfc {

using grad::Tape;
using grad::Var;

std::string to_string(Architecture a) {
    switch (a) {
    case Architecture::StackedMW:
        return "STACKED_MW";
    case Architecture::S2SDecoderNMW:
        return "S2S_DECODER_NMW";
    case Architecture::S2SDDenseNMW:
        return "S2SD_DENSE_NMW";
    case Architecture::S2SDDenseMW:
        return "S2SD_DENSE_MW";
    }
    return "?";
}

Architecture parse_architecture(const std::string& name) {
    for (auto a : {Architecture::StackedMW, Architecture::S2SDecoderNMW, Architecture::S2SDDenseNMW,
                   Architecture::S2SDDenseMW}) {
        if (name == to_string(a)) {
            return a;
        }
    }
    throw ParseError("unknown architecture '" + name +
                     "' (expected STACKED_MW, S2S_DECODER_NMW, S2SD_DENSE_NMW or S2SD_DENSE_MW)");
}

InputFormat input_format(Architecture a) {
    return (a == Architecture::StackedMW || a == Architecture::S2SDDenseMW) ? InputFormat::MovingWindow
                                                                             : InputFormat::Sequence;
}

std::vector<double> inject_input_noise(std::span<const double> inputs, double sigma, std::mt19937_64& rng) {
    std::vector<double> out(inputs.begin(), inputs.end());
    if (sigma < 0.0) {
        throw ContractError("input noise standard deviation must be >= 0");
    }
    if (sigma == 0.0) {
        return out;
    }
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& v : out) {
        v += noise(rng);
    }
    return out;
}

Var regularized_loss(Tape& tape, Var error, grad::ParameterSet& params, double psi) {
    if (psi == 0.0) {
        return error;
    }
    Var total = error;
    for (auto& p : params) {
        total = tape.add(total, tape.scale(tape.sum_squares(tape.parameter(p)), psi));
    }
    return total;
}

double regularized_loss(double error, const grad::ParameterSet& params, double psi) {
    return error + psi * params.sum_of_squares();
}

namespace {

std::string layer_prefix(const char* stack, int layer) {
    return std::string(stack) + "/l" + std::to_string(layer) + "/";
}

bool is_bias(const std::string& name) {
    auto slash = name.rfind('/');
    return name.compare(slash == std::string::npos ? 0 : slash + 1, 1, "b") == 0;
}

} // namespace

Network::Network(NetworkSpec spec) : spec_(spec) {
    if (input_format(spec_.architecture) == InputFormat::Sequence) {
        spec_.input_size = 1;
    }
    if (spec_.input_size < 1 || spec_.cell_dim < 1 || spec_.layers < 1 || spec_.horizon < 1) {
        throw SizingError("network needs input size, cell dimension, layers and horizon >= 1");
    }
    const int d = spec_.cell_dim;
    const auto ud = static_cast<std::size_t>(d);
    const auto uh = static_cast<std::size_t>(spec_.horizon);
    for (int k = 0; k < spec_.layers; ++k) {
        add_cell_parameters(params_, layer_prefix("enc", k), spec_.cell, k == 0 ? spec_.input_size : d, d);
    }
    switch (spec_.architecture) {
    case Architecture::StackedMW:
        params_.add("proj/W", uh, ud);
        params_.add("proj/b", uh, 1);
        break;
    case Architecture::S2SDecoderNMW:
        for (int k = 0; k < spec_.layers; ++k) {
            add_cell_parameters(params_, layer_prefix("dec", k), spec_.cell, k == 0 ? 1 : d, d);
        }
        params_.add("dec_proj/W", 1, ud);
        params_.add("dec_proj/b", 1, 1);
        break;
    case Architecture::S2SDDenseNMW:
    case Architecture::S2SDDenseMW:
        params_.add("proj/W", uh, ud);
        break;
    }
}

void Network::initialize(double init_sigma, std::uint64_t seed) {
    if (!(init_sigma >= 0.0)) {
        throw ContractError("initial weight standard deviation must be >= 0");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, init_sigma > 0.0 ? init_sigma : 1.0);
    for (auto& p : params_) {
        auto values = p.value.data();
        if (is_bias(p.name) || init_sigma == 0.0) {
            std::fill(values.begin(), values.end(), 0.0);
        } else {
            for (auto& v : values) {
                v = normal(rng);
            }
        }
        p.grad.fill(0.0);
    }
}

Network::Stack Network::bind_stack(Tape& tape, const std::string& prefix, int input_size) {
    Stack stack;
    for (int k = 0; k < spec_.layers; ++k) {
        stack.layers.emplace_back(tape, params_, prefix + "/l" + std::to_string(k) + "/", spec_.cell,
                                  k == 0 ? input_size : spec_.cell_dim, spec_.cell_dim);
        stack.states.push_back(stack.layers.back().zero_state());
    }
    return stack;
}

Var Network::run_step(Tape&, Stack& stack, Var x) {
    for (std::size_t k = 0; k < stack.layers.size(); ++k) {
        StepResult r = stack.layers[k].step(stack.states[k], x);
        stack.states[k] = r.state;
        x = r.output;
    }
    return x;
}

Var Network::run_encoder(Tape& tape, Stack& stack, const std::vector<std::vector<double>>& inputs) {
    if (inputs.empty()) {
        throw ContractError("encoder needs at least one input step");
    }
    Var out;
    for (const auto& in : inputs) {
        out = run_step(tape, stack, tape.constant(in));
    }
    return out;
}

ForwardResult Network::stacked_forward(Tape& tape, const std::vector<std::vector<double>>& inputs,
                                       const std::vector<std::optional<std::vector<double>>>& targets) {
    if (spec_.architecture != Architecture::StackedMW) {
        throw ContractError("stacked_forward called on " + to_string(spec_.architecture));
    }
    if (!targets.empty() && targets.size() != inputs.size()) {
        throw ShapeError("stacked_forward: " + std::to_string(inputs.size()) + " inputs but " +
                         std::to_string(targets.size()) + " targets");
    }
    Stack stack = bind_stack(tape, "enc", spec_.input_size);
    Var W = tape.parameter(params_.at("proj/W"));
    Var b = tape.parameter(params_.at("proj/b"));
    ForwardResult result;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        Var z = run_step(tape, stack, tape.constant(inputs[t]));
        Var pred = tape.affine(W, z, b);
        result.predictions.push_back(pred);
        if (!targets.empty() && targets[t]) {
            Var e = tape.mean_abs_error(pred, tape.constant(*targets[t]));
            result.error = result.error.valid() ? tape.add(result.error, e) : e;
        }
    }
    return result;
}

ForwardResult Network::s2s_decoder_forward(Tape& tape, std::span<const double> encoder_inputs,
                                           const std::optional<std::vector<double>>& targets, DecoderMode mode) {
    if (spec_.architecture != Architecture::S2SDecoderNMW) {
        throw ContractError("s2s_decoder_forward called on " + to_string(spec_.architecture));
    }
    if (encoder_inputs.empty()) {
        throw ContractError("encoder needs at least one input step");
    }
    if (mode == DecoderMode::TeacherForced && !targets) {
        throw ContractError("teacher forcing needs targets");
    }
    const auto uh = static_cast<std::size_t>(spec_.horizon);
    if (targets && targets->size() != uh) {
        throw ShapeError("decoder targets have length " + std::to_string(targets->size()) + ", expected " +
                         std::to_string(uh));
    }

    Stack enc = bind_stack(tape, "enc", 1);
    for (double v : encoder_inputs) {
        run_step(tape, enc, tape.constant(std::span<const double>(&v, 1)));
    }
    Stack dec = bind_stack(tape, "dec", 1);
    dec.states = enc.states;
    Var W = tape.parameter(params_.at("dec_proj/W"));
    Var b = tape.parameter(params_.at("dec_proj/b"));

    ForwardResult result;
    double prev = encoder_inputs.back();
    Var prev_var = tape.constant(std::span<const double>(&prev, 1));
    std::vector<Var> preds;
    for (std::size_t k = 0; k < uh; ++k) {
        Var z = run_step(tape, dec, prev_var);
        Var pred = tape.affine(W, z, b);
        preds.push_back(pred);
        if (mode == DecoderMode::TeacherForced) {
            prev_var = tape.constant(std::span<const double>(&(*targets)[k], 1));
        } else {
            prev_var = pred;
        }
    }
    result.predictions = preds;
    if (targets) {
        Var all = preds[0];
        for (std::size_t k = 1; k < uh; ++k) {
            all = tape.concat(all, preds[k]);
        }
        result.error = tape.mean_abs_error(all, tape.constant(*targets));
    }
    return result;
}

ForwardResult Network::s2sd_forward(Tape& tape, const std::vector<std::vector<double>>& inputs,
                                    const std::optional<std::vector<double>>& target) {
    if (spec_.architecture != Architecture::S2SDDenseMW && spec_.architecture != Architecture::S2SDDenseNMW) {
        throw ContractError("s2sd_forward called on " + to_string(spec_.architecture));
    }
    Stack stack = bind_stack(tape, "enc", spec_.input_size);
    Var z = run_encoder(tape, stack, inputs);
    Var pred = tape.affine(tape.parameter(params_.at("proj/W")), z);
    ForwardResult result;
    result.predictions.push_back(pred);
    if (target) {
        result.error = tape.mean_abs_error(pred, tape.constant(*target));
    }
    return result;
}

namespace {

std::vector<std::vector<double>> scalar_steps(std::span<const double> values) {
    std::vector<std::vector<double>> steps;
    steps.reserve(values.size());
    for (double v : values) {
        steps.push_back({v});
    }
    return steps;
}

void check_format(const WindowSet& ws, Architecture a) {
    if (ws.format != input_format(a)) {
        throw ContractError("window set '" + ws.series_id + "' has " + to_string(ws.format) + " format but " +
                            to_string(a) + " needs " + to_string(input_format(a)));
    }
    if (ws.blocks.empty()) {
        throw ContractError("window set '" + ws.series_id + "' has no blocks");
    }
}

} // namespace

Var Network::training_error(Tape& tape, const WindowSet& ws, double noise_sigma, std::mt19937_64& rng) {
    check_format(ws, spec_.architecture);
    if (ws.stage != Stage::Train && ws.stage != Stage::Refit) {
        throw ContractError("training_error needs a train or refit window set, got " + to_string(ws.stage));
    }
    switch (spec_.architecture) {
    case Architecture::StackedMW: {
        std::vector<std::vector<double>> inputs;
        std::vector<std::optional<std::vector<double>>> targets;
        for (const auto& b : ws.blocks) {
            inputs.push_back(inject_input_noise(b.input, noise_sigma, rng));
            targets.push_back(b.target);
        }
        return stacked_forward(tape, inputs, targets).error;
    }
    case Architecture::S2SDDenseMW: {
        std::vector<std::vector<double>> inputs;
        for (const auto& b : ws.blocks) {
            inputs.push_back(inject_input_noise(b.input, noise_sigma, rng));
        }
        return s2sd_forward(tape, inputs, ws.blocks.back().target).error;
    }
    case Architecture::S2SDDenseNMW: {
        const auto& b = ws.blocks.front();
        return s2sd_forward(tape, scalar_steps(inject_input_noise(b.input, noise_sigma, rng)), b.target).error;
    }
    case Architecture::S2SDecoderNMW: {
        const auto& b = ws.blocks.front();
        auto noisy = inject_input_noise(b.input, noise_sigma, rng);
        return s2s_decoder_forward(tape, noisy, b.target, DecoderMode::TeacherForced).error;
    }
    }
    throw ContractError("unknown architecture");
}

std::vector<double> Network::forecast(const WindowSet& ws) const {
    // Only a forward pass is recorded, so the parameters are never written.
    return const_cast<Network*>(this)->forecast_impl(ws);
}

std::vector<double> Network::forecast_impl(const WindowSet& ws) {
    check_format(ws, spec_.architecture);
    Tape tape;
    Var pred;
    switch (spec_.architecture) {
    case Architecture::StackedMW:
    case Architecture::S2SDDenseMW: {
        std::vector<std::vector<double>> inputs = ws.warmup;
        for (const auto& b : ws.blocks) {
            inputs.push_back(b.input);
        }
        if (spec_.architecture == Architecture::StackedMW) {
            pred = stacked_forward(tape, inputs, {}).predictions.back();
        } else {
            pred = s2sd_forward(tape, inputs, std::nullopt).predictions.back();
        }
        break;
    }
    case Architecture::S2SDDenseNMW:
        pred = s2sd_forward(tape, scalar_steps(ws.blocks.front().input), std::nullopt).predictions.back();
        break;
    case Architecture::S2SDecoderNMW: {
        auto r = s2s_decoder_forward(tape, ws.blocks.front().input, std::nullopt, DecoderMode::Autoregressive);
        std::vector<double> out;
        for (Var v : r.predictions) {
            out.push_back(tape.scalar(v));
        }
        return out;
    }
    }
    auto v = tape.value(pred);
    return {v.begin(), v.end()};
}

} // namespace rnnfc
