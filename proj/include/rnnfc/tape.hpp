#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rnnfc::grad {

/// Dense row-major matrix; a column vector has cols == 1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor column(std::vector<double> values) {
        Tensor t;
        t.rows_ = values.size();
        t.cols_ = 1;
        t.data_ = std::move(values);
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

/// Ordered collection of named parameters with stable addresses.
class ParameterSet {
public:
    Parameter& add(std::string name, std::size_t rows, std::size_t cols);

    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;
    Parameter* find(std::string_view name);
    const Parameter* find(std::string_view name) const;

    std::size_t count() const { return params_.size(); }
    std::size_t scalar_count() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad();
    double sum_of_squares() const;

    std::vector<double> flat_values() const;
    std::vector<double> flat_grads() const;
    void assign_flat_values(std::span<const double> values);

private:
    std::deque<Parameter> params_;
};

struct Var {
    std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
    bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

/// Records primitive operations on dense tensors and replays them in reverse to
/// accumulate gradients. Spans returned by value() are invalidated by the next op.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(std::span<const double> values, std::size_t rows, std::size_t cols = 1);
    Var constant(std::span<const double> values) { return constant(values, values.size(), 1); }
    Var zeros(std::size_t rows);
    /// Leaf bound to `p`; backward() adds into p.grad. Bind each parameter once per tape.
    Var parameter(Parameter& p);

    /// W * x (+ b). Pass an invalid Var to skip the bias.
    Var affine(Var w, Var x, Var b = {});
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var hadamard(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double factor);
    Var one_minus(Var a);
    Var concat(Var a, Var b);
    Var slice(Var a, std::size_t offset, std::size_t length);
    Var sum(Var a);
    Var sum_squares(Var a);
    /// mean_k |pred_k - target_k|
    Var mean_abs_error(Var pred, Var target);

    std::span<const double> value(Var v) const;
    double scalar(Var v) const;
    std::size_t rows(Var v) const { return nodes_.at(v.id).rows; }
    std::size_t cols(Var v) const { return nodes_.at(v.id).cols; }
    std::size_t size(Var v) const { return nodes_.at(v.id).rows * nodes_.at(v.id).cols; }

    /// Reverse sweep from a scalar loss. Gradients of bound parameters are added to Parameter::grad.
    void backward(Var loss);
    /// Gradient of any node after backward().
    std::span<const double> gradient(Var v) const;

    std::size_t node_count() const { return nodes_.size(); }
    void clear();

private:
    enum class Op : std::uint8_t {
        Constant,
        Parameter,
        Affine,
        Sigmoid,
        Tanh,
        Hadamard,
        Add,
        Sub,
        Scale,
        OneMinus,
        Concat,
        Slice,
        Sum,
        SumSquares,
        MeanAbsError
    };

    struct Node {
        Op op;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        std::uint32_t c = 0;
        bool has_c = false;
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::size_t offset = 0;
        double aux = 0.0;
        Parameter* param = nullptr;
    };

    Var push(Op op, std::size_t rows, std::size_t cols);
    const Node& node(Var v) const;
    void check_finite(Var v, const char* op) const;
    void require_vector(Var v, const char* op) const;
    void require_same(Var a, Var b, const char* op) const;

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> grads_;
};

} // namespace rnnfc::grad
