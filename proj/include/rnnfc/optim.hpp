#pragma once

#include "rnnfc/checkpoint.hpp"
#include "rnnfc/tape.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rnnfc {

enum class OptimizerKind { Adam, Adagrad, Cocob };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

/// Updates parameters in place from the gradients accumulated in Parameter::grad.
/// Per-coordinate state is created lazily on the first step.
class Optimizer {
public:
    virtual ~Optimizer() = default;

    /// Throws NumericError on a non-finite gradient, before anything is modified, and
    /// on a non-finite parameter after the update.
    void step(grad::ParameterSet& params);

    virtual OptimizerKind kind() const = 0;
    std::int64_t steps() const { return steps_; }

    std::vector<NamedArray> export_state() const;
    void import_state(const std::vector<NamedArray>& state, std::int64_t steps);

protected:
    struct Slot {
        std::string name;
        std::vector<std::vector<double>> buffers;
    };

    virtual std::vector<std::string> buffer_names() const = 0;
    virtual void init_slot(const grad::Parameter& p, Slot& slot) const;
    virtual void update(grad::Parameter& p, Slot& slot) = 0;

    std::vector<Slot> slots_;
    std::int64_t steps_ = 0;
};

class Adam final : public Optimizer {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    OptimizerKind kind() const override { return OptimizerKind::Adam; }

private:
    std::vector<std::string> buffer_names() const override { return {"m", "v"}; }
    void update(grad::Parameter& p, Slot& slot) override;

    double lr_, beta1_, beta2_, eps_;
};

class Adagrad final : public Optimizer {
public:
    explicit Adagrad(double learning_rate, double eps = 1e-10);
    OptimizerKind kind() const override { return OptimizerKind::Adagrad; }

private:
    std::vector<std::string> buffer_names() const override { return {"G"}; }
    void update(grad::Parameter& p, Slot& slot) override;

    double lr_, eps_;
};

/// COCOB-Backprop coin betting; no learning rate.
class Cocob final : public Optimizer {
public:
    explicit Cocob(double alpha = 100.0);
    OptimizerKind kind() const override { return OptimizerKind::Cocob; }

    /// Per-coordinate state of the named parameter (empty before the first step).
    std::vector<double> reward(const std::string& name) const { return buffer(name, 2); }
    std::vector<double> max_gradient(const std::string& name) const { return buffer(name, 0); }
    std::vector<double> gradient_norm_sum(const std::string& name) const { return buffer(name, 1); }

    static constexpr double kInitialL = 1e-8;

private:
    std::vector<std::string> buffer_names() const override { return {"L", "G_sum", "R", "theta", "w_init"}; }
    void init_slot(const grad::Parameter& p, Slot& slot) const override;
    void update(grad::Parameter& p, Slot& slot) override;
    std::vector<double> buffer(const std::string& name, std::size_t index) const;

    double alpha_;
};

/// Learning rate required for Adam/Adagrad and forbidden for COCOB (ContractError).
std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, std::optional<double> learning_rate);

} // namespace rnnfc
