#include "rnnfc/optim.hpp"

#include "rnnfc/error.hpp"

#include <algorithm>
#include <cmath>

namespace rnnfc {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::Adam:
        return "adam";
    case OptimizerKind::Adagrad:
        return "adagrad";
    case OptimizerKind::Cocob:
        return "cocob";
    }
    return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (auto k : {OptimizerKind::Adam, OptimizerKind::Adagrad, OptimizerKind::Cocob}) {
        if (lower == to_string(k)) {
            return k;
        }
    }
    throw ParseError("unknown optimizer '" + name + "' (expected adam, adagrad or cocob)");
}

void Optimizer::init_slot(const grad::Parameter& p, Slot& slot) const {
    slot.name = p.name;
    slot.buffers.assign(buffer_names().size(), std::vector<double>(p.value.size(), 0.0));
}

void Optimizer::step(grad::ParameterSet& params) {
    for (const auto& p : params) {
        for (double g : p.grad.data()) {
            if (!std::isfinite(g)) {
                throw NumericError("optimizer step " + std::to_string(steps_ + 1) + ": non-finite gradient in '" +
                                   p.name + "'");
            }
        }
    }
    if (slots_.empty()) {
        for (const auto& p : params) {
            Slot slot;
            init_slot(p, slot);
            slots_.push_back(std::move(slot));
        }
    }
    if (slots_.size() != params.count()) {
        throw ContractError("optimizer state covers " + std::to_string(slots_.size()) + " parameters, got " +
                            std::to_string(params.count()));
    }
    ++steps_;
    std::size_t i = 0;
    for (auto& p : params) {
        Slot& slot = slots_[i++];
        if (slot.name != p.name || slot.buffers.front().size() != p.value.size()) {
            throw ContractError("optimizer state does not match parameter '" + p.name + "'");
        }
        update(p, slot);
        for (double v : p.value.data()) {
            if (!std::isfinite(v)) {
                throw NumericError("optimizer step " + std::to_string(steps_) + ": parameter '" + p.name +
                                   "' became non-finite");
            }
        }
    }
}

std::vector<NamedArray> Optimizer::export_state() const {
    std::vector<NamedArray> out;
    const auto names = buffer_names();
    for (const auto& slot : slots_) {
        for (std::size_t b = 0; b < slot.buffers.size(); ++b) {
            out.push_back({slot.name + "#" + names[b], slot.buffers[b].size(), 1, slot.buffers[b]});
        }
    }
    return out;
}

void Optimizer::import_state(const std::vector<NamedArray>& state, std::int64_t steps) {
    const auto names = buffer_names();
    if (state.size() % names.size() != 0) {
        throw ContractError("optimizer state has " + std::to_string(state.size()) + " arrays, not a multiple of " +
                            std::to_string(names.size()));
    }
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < state.size(); i += names.size()) {
        Slot slot;
        const auto& first = state[i].name;
        slot.name = first.substr(0, first.rfind('#'));
        for (std::size_t b = 0; b < names.size(); ++b) {
            const auto& a = state[i + b];
            if (a.name != slot.name + "#" + names[b]) {
                throw ContractError("unexpected optimizer state array '" + a.name + "'");
            }
            slot.buffers.push_back(a.data);
        }
        slots.push_back(std::move(slot));
    }
    slots_ = std::move(slots);
    steps_ = steps;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(learning_rate > 0.0)) {
        throw ContractError("adam: learning rate must be > 0");
    }
}

void Adam::update(grad::Parameter& p, Slot& slot) {
    auto& m = slot.buffers[0];
    auto& v = slot.buffers[1];
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(beta1_, t);
    const double c2 = 1.0 - std::pow(beta2_, t);
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
}

Adagrad::Adagrad(double learning_rate, double eps) : lr_(learning_rate), eps_(eps) {
    if (!(learning_rate > 0.0)) {
        throw ContractError("adagrad: learning rate must be > 0");
    }
}

void Adagrad::update(grad::Parameter& p, Slot& slot) {
    auto& G = slot.buffers[0];
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
        G[i] += g[i] * g[i];
        w[i] -= lr_ * g[i] / (std::sqrt(G[i]) + eps_);
    }
}

Cocob::Cocob(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0)) {
        throw ContractError("cocob: alpha must be > 0");
    }
}

void Cocob::init_slot(const grad::Parameter& p, Slot& slot) const {
    Optimizer::init_slot(p, slot);
    std::fill(slot.buffers[0].begin(), slot.buffers[0].end(), kInitialL);
    auto w = p.value.data();
    slot.buffers[4].assign(w.begin(), w.end());
}

void Cocob::update(grad::Parameter& p, Slot& slot) {
    auto& L = slot.buffers[0];
    auto& G = slot.buffers[1];
    auto& R = slot.buffers[2];
    auto& theta = slot.buffers[3];
    const auto& w0 = slot.buffers[4];
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i];
        L[i] = std::max(L[i], std::abs(gi));
        G[i] += std::abs(gi);
        R[i] = std::max(R[i] - (w[i] - w0[i]) * gi, 0.0);
        theta[i] -= gi;
        const double bet = theta[i] / (L[i] * std::max(G[i] + L[i], alpha_ * L[i])) * (L[i] + R[i]);
        w[i] = w0[i] + bet;
    }
}

std::vector<double> Cocob::buffer(const std::string& name, std::size_t index) const {
    for (const auto& slot : slots_) {
        if (slot.name == name) {
            return slot.buffers[index];
        }
    }
    return {};
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, std::optional<double> learning_rate) {
    switch (kind) {
    case OptimizerKind::Cocob:
        if (learning_rate) {
            throw ContractError("cocob takes no learning rate");
        }
        return std::make_unique<Cocob>();
    case OptimizerKind::Adam:
    case OptimizerKind::Adagrad:
        if (!learning_rate) {
            throw ContractError(to_string(kind) + " requires a learning rate");
        }
        if (kind == OptimizerKind::Adam) {
            return std::make_unique<Adam>(*learning_rate);
        }
        return std::make_unique<Adagrad>(*learning_rate);
    }
    throw ContractError("unknown optimizer kind");
}

} // namespace rnnfc
