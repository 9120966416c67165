#include "rnnfc/tape.hpp"

#include "rnnfc/error.hpp"

#include <cmath>
#include <sstream>

namespace rnnfc::grad {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    std::ostringstream os;
    os << "(" << r << "x" << c << ")";
    return os.str();
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

// --- ParameterSet ---------------------------------------------------------

Parameter& ParameterSet::add(std::string name, std::size_t rows, std::size_t cols) {
    if (find(name) != nullptr) {
        throw ContractError("duplicate parameter name '" + name + "'");
    }
    params_.push_back(Parameter{std::move(name), Tensor(rows, cols), Tensor(rows, cols)});
    return params_.back();
}

Parameter* ParameterSet::find(std::string_view name) {
    for (auto& p : params_) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
    for (const auto& p : params_) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

Parameter& ParameterSet::at(std::string_view name) {
    if (auto* p = find(name)) {
        return *p;
    }
    throw ContractError("unknown parameter '" + std::string(name) + "'");
}

const Parameter& ParameterSet::at(std::string_view name) const {
    if (const auto* p = find(name)) {
        return *p;
    }
    throw ContractError("unknown parameter '" + std::string(name) + "'");
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.value.size();
    }
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) {
        p.grad.fill(0.0);
    }
}

double ParameterSet::sum_of_squares() const {
    double s = 0.0;
    for (const auto& p : params_) {
        for (double v : p.value.data()) {
            s += v * v;
        }
    }
    return s;
}

std::vector<double> ParameterSet::flat_values() const {
    std::vector<double> out;
    out.reserve(scalar_count());
    for (const auto& p : params_) {
        out.insert(out.end(), p.value.data().begin(), p.value.data().end());
    }
    return out;
}

std::vector<double> ParameterSet::flat_grads() const {
    std::vector<double> out;
    out.reserve(scalar_count());
    for (const auto& p : params_) {
        out.insert(out.end(), p.grad.data().begin(), p.grad.data().end());
    }
    return out;
}

void ParameterSet::assign_flat_values(std::span<const double> values) {
    if (values.size() != scalar_count()) {
        throw ShapeError("assign_flat_values: expected " + std::to_string(scalar_count()) + " values, got " +
                         std::to_string(values.size()));
    }
    std::size_t k = 0;
    for (auto& p : params_) {
        for (double& v : p.value.data()) {
            v = values[k++];
        }
    }
}

// --- Tape -----------------------------------------------------------------

Var Tape::push(Op op, std::size_t rows, std::size_t cols) {
    Node n;
    n.op = op;
    n.rows = rows;
    n.cols = cols;
    n.offset = values_.size();
    values_.resize(values_.size() + rows * cols, 0.0);
    nodes_.push_back(n);
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) {
        throw ContractError("tape: invalid variable handle");
    }
    return nodes_[v.id];
}

void Tape::check_finite(Var v, const char* op) const {
    const auto& n = nodes_[v.id];
    for (std::size_t i = 0; i < n.rows * n.cols; ++i) {
        if (!std::isfinite(values_[n.offset + i])) {
            throw NumericError(std::string("tape: non-finite value produced by ") + op);
        }
    }
}

void Tape::require_vector(Var v, const char* op) const {
    const auto& n = node(v);
    if (n.cols != 1) {
        throw ShapeError(std::string(op) + ": expected a column vector, got " + shape_str(n.rows, n.cols));
    }
}

void Tape::require_same(Var a, Var b, const char* op) const {
    const auto& na = node(a);
    const auto& nb = node(b);
    if (na.rows != nb.rows || na.cols != nb.cols) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(na.rows, na.cols) + " vs " +
                         shape_str(nb.rows, nb.cols));
    }
}

Var Tape::constant(std::span<const double> values, std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols) {
        throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " + shape_str(rows, cols));
    }
    Var v = push(Op::Constant, rows, cols);
    std::copy(values.begin(), values.end(), values_.begin() + static_cast<std::ptrdiff_t>(nodes_[v.id].offset));
    check_finite(v, "constant");
    return v;
}

Var Tape::zeros(std::size_t rows) { return push(Op::Constant, rows, 1); }

Var Tape::parameter(Parameter& p) {
    Var v = push(Op::Parameter, p.value.rows(), p.value.cols());
    nodes_[v.id].param = &p;
    auto src = p.value.data();
    std::copy(src.begin(), src.end(), values_.begin() + static_cast<std::ptrdiff_t>(nodes_[v.id].offset));
    check_finite(v, "parameter");
    return v;
}

Var Tape::affine(Var w, Var x, Var b) {
    const auto& nw = node(w);
    require_vector(x, "affine");
    const auto& nx = node(x);
    if (nw.cols != nx.rows) {
        throw ShapeError("affine: W " + shape_str(nw.rows, nw.cols) + " incompatible with x " +
                         shape_str(nx.rows, nx.cols));
    }
    if (b.valid()) {
        const auto& nb = node(b);
        if (nb.rows != nw.rows || nb.cols != 1) {
            throw ShapeError("affine: bias " + shape_str(nb.rows, nb.cols) + " incompatible with W " +
                             shape_str(nw.rows, nw.cols));
        }
    }
    const std::size_t rows = nw.rows;
    const std::size_t cols = nw.cols;
    Var out = push(Op::Affine, rows, 1);
    auto& n = nodes_[out.id];
    n.a = w.id;
    n.b = x.id;
    n.has_c = b.valid();
    n.c = b.valid() ? b.id : 0;

    const double* W = values_.data() + nodes_[w.id].offset;
    const double* X = values_.data() + nodes_[x.id].offset;
    const double* B = b.valid() ? values_.data() + nodes_[b.id].offset : nullptr;
    double* Y = values_.data() + n.offset;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = W + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            s += row[c] * X[c];
        }
        Y[r] = B ? s + B[r] : s;
    }
    check_finite(out, "affine");
    return out;
}

Var Tape::sigmoid(Var a) {
    const auto& na = node(a);
    Var out = push(Op::Sigmoid, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = stable_sigmoid(A[i]);
    }
    check_finite(out, "sigmoid");
    return out;
}

Var Tape::tanh(Var a) {
    const auto& na = node(a);
    Var out = push(Op::Tanh, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = std::tanh(A[i]);
    }
    check_finite(out, "tanh");
    return out;
}

Var Tape::hadamard(Var a, Var b) {
    require_same(a, b, "hadamard");
    const auto& na = node(a);
    Var out = push(Op::Hadamard, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    nodes_[out.id].b = b.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    const double* B = values_.data() + nodes_[b.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = A[i] * B[i];
    }
    check_finite(out, "hadamard");
    return out;
}

Var Tape::add(Var a, Var b) {
    require_same(a, b, "add");
    const auto& na = node(a);
    Var out = push(Op::Add, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    nodes_[out.id].b = b.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    const double* B = values_.data() + nodes_[b.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = A[i] + B[i];
    }
    check_finite(out, "add");
    return out;
}

Var Tape::sub(Var a, Var b) {
    require_same(a, b, "sub");
    const auto& na = node(a);
    Var out = push(Op::Sub, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    nodes_[out.id].b = b.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    const double* B = values_.data() + nodes_[b.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = A[i] - B[i];
    }
    check_finite(out, "sub");
    return out;
}

Var Tape::scale(Var a, double factor) {
    const auto& na = node(a);
    Var out = push(Op::Scale, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    nodes_[out.id].aux = factor;
    const double* A = values_.data() + nodes_[a.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = factor * A[i];
    }
    check_finite(out, "scale");
    return out;
}

Var Tape::one_minus(Var a) {
    const auto& na = node(a);
    Var out = push(Op::OneMinus, na.rows, na.cols);
    nodes_[out.id].a = a.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    for (std::size_t i = 0; i < nodes_[out.id].rows * nodes_[out.id].cols; ++i) {
        Y[i] = 1.0 - A[i];
    }
    return out;
}

Var Tape::concat(Var a, Var b) {
    require_vector(a, "concat");
    require_vector(b, "concat");
    const std::size_t ra = node(a).rows;
    const std::size_t rb = node(b).rows;
    Var out = push(Op::Concat, ra + rb, 1);
    nodes_[out.id].a = a.id;
    nodes_[out.id].b = b.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    const double* B = values_.data() + nodes_[b.id].offset;
    double* Y = values_.data() + nodes_[out.id].offset;
    std::copy(A, A + ra, Y);
    std::copy(B, B + rb, Y + ra);
    return out;
}

Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
    require_vector(a, "slice");
    const std::size_t ra = node(a).rows;
    if (offset + length > ra) {
        throw ShapeError("slice: range [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                         ") outside vector of length " + std::to_string(ra));
    }
    Var out = push(Op::Slice, length, 1);
    nodes_[out.id].a = a.id;
    nodes_[out.id].aux = static_cast<double>(offset);
    const double* A = values_.data() + nodes_[a.id].offset + offset;
    std::copy(A, A + length, values_.data() + nodes_[out.id].offset);
    return out;
}

Var Tape::sum(Var a) {
    const auto& na = node(a);
    const std::size_t len = na.rows * na.cols;
    Var out = push(Op::Sum, 1, 1);
    nodes_[out.id].a = a.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        s += A[i];
    }
    values_[nodes_[out.id].offset] = s;
    check_finite(out, "sum");
    return out;
}

Var Tape::sum_squares(Var a) {
    const auto& na = node(a);
    const std::size_t len = na.rows * na.cols;
    Var out = push(Op::SumSquares, 1, 1);
    nodes_[out.id].a = a.id;
    const double* A = values_.data() + nodes_[a.id].offset;
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        s += A[i] * A[i];
    }
    values_[nodes_[out.id].offset] = s;
    check_finite(out, "sum_squares");
    return out;
}

Var Tape::mean_abs_error(Var pred, Var target) {
    require_same(pred, target, "mean_abs_error");
    const auto& np = node(pred);
    const std::size_t len = np.rows * np.cols;
    if (len == 0) {
        throw ShapeError("mean_abs_error: empty operands");
    }
    Var out = push(Op::MeanAbsError, 1, 1);
    nodes_[out.id].a = pred.id;
    nodes_[out.id].b = target.id;
    const double* P = values_.data() + nodes_[pred.id].offset;
    const double* T = values_.data() + nodes_[target.id].offset;
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        s += std::abs(P[i] - T[i]);
    }
    values_[nodes_[out.id].offset] = s / static_cast<double>(len);
    check_finite(out, "mean_abs_error");
    return out;
}

std::span<const double> Tape::value(Var v) const {
    const auto& n = node(v);
    return {values_.data() + n.offset, n.rows * n.cols};
}

double Tape::scalar(Var v) const {
    const auto& n = node(v);
    if (n.rows * n.cols != 1) {
        throw ShapeError("scalar: node has shape " + shape_str(n.rows, n.cols));
    }
    return values_[n.offset];
}

std::span<const double> Tape::gradient(Var v) const {
    const auto& n = node(v);
    if (grads_.size() != values_.size()) {
        throw ContractError("gradient: backward() has not been run on this tape");
    }
    return {grads_.data() + n.offset, n.rows * n.cols};
}

void Tape::clear() {
    nodes_.clear();
    values_.clear();
    grads_.clear();
}

void Tape::backward(Var loss) {
    const auto& nl = node(loss);
    if (nl.rows * nl.cols != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(nl.rows, nl.cols));
    }
    grads_.assign(values_.size(), 0.0);
    grads_[nl.offset] = 1.0;

    const double* V = values_.data();
    double* G = grads_.data();

    for (std::size_t idx = loss.id + 1; idx-- > 0;) {
        const Node& n = nodes_[idx];
        const std::size_t len = n.rows * n.cols;
        const double* g = G + n.offset;
        const double* y = V + n.offset;

        switch (n.op) {
        case Op::Constant:
            break;
        case Op::Parameter: {
            auto dst = n.param->grad.data();
            for (std::size_t i = 0; i < len; ++i) {
                dst[i] += g[i];
            }
            break;
        }
        case Op::Affine: {
            const Node& nw = nodes_[n.a];
            const Node& nx = nodes_[n.b];
            const std::size_t cols = nw.cols;
            const double* W = V + nw.offset;
            const double* X = V + nx.offset;
            double* gW = G + nw.offset;
            double* gX = G + nx.offset;
            for (std::size_t r = 0; r < n.rows; ++r) {
                const double gr = g[r];
                if (gr == 0.0) {
                    continue;
                }
                const double* row = W + r * cols;
                double* grow = gW + r * cols;
                for (std::size_t c = 0; c < cols; ++c) {
                    grow[c] += gr * X[c];
                    gX[c] += gr * row[c];
                }
            }
            if (n.has_c) {
                double* gB = G + nodes_[n.c].offset;
                for (std::size_t r = 0; r < n.rows; ++r) {
                    gB[r] += g[r];
                }
            }
            break;
        }
        case Op::Sigmoid: {
            double* ga = G + nodes_[n.a].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i] * y[i] * (1.0 - y[i]);
            }
            break;
        }
        case Op::Tanh: {
            double* ga = G + nodes_[n.a].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i] * (1.0 - y[i] * y[i]);
            }
            break;
        }
        case Op::Hadamard: {
            const double* A = V + nodes_[n.a].offset;
            const double* B = V + nodes_[n.b].offset;
            double* ga = G + nodes_[n.a].offset;
            double* gb = G + nodes_[n.b].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i] * B[i];
                gb[i] += g[i] * A[i];
            }
            break;
        }
        case Op::Add: {
            double* ga = G + nodes_[n.a].offset;
            double* gb = G + nodes_[n.b].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
            break;
        }
        case Op::Sub: {
            double* ga = G + nodes_[n.a].offset;
            double* gb = G + nodes_[n.b].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i];
                gb[i] -= g[i];
            }
            break;
        }
        case Op::Scale: {
            double* ga = G + nodes_[n.a].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += n.aux * g[i];
            }
            break;
        }
        case Op::OneMinus: {
            double* ga = G + nodes_[n.a].offset;
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] -= g[i];
            }
            break;
        }
        case Op::Concat: {
            const std::size_t ra = nodes_[n.a].rows;
            double* ga = G + nodes_[n.a].offset;
            double* gb = G + nodes_[n.b].offset;
            for (std::size_t i = 0; i < ra; ++i) {
                ga[i] += g[i];
            }
            for (std::size_t i = ra; i < len; ++i) {
                gb[i - ra] += g[i];
            }
            break;
        }
        case Op::Slice: {
            double* ga = G + nodes_[n.a].offset + static_cast<std::size_t>(n.aux);
            for (std::size_t i = 0; i < len; ++i) {
                ga[i] += g[i];
            }
            break;
        }
        case Op::Sum: {
            const Node& na = nodes_[n.a];
            double* ga = G + na.offset;
            for (std::size_t i = 0; i < na.rows * na.cols; ++i) {
                ga[i] += g[0];
            }
            break;
        }
        case Op::SumSquares: {
            const Node& na = nodes_[n.a];
            const double* A = V + na.offset;
            double* ga = G + na.offset;
            for (std::size_t i = 0; i < na.rows * na.cols; ++i) {
                ga[i] += 2.0 * A[i] * g[0];
            }
            break;
        }
        case Op::MeanAbsError: {
            const Node& np = nodes_[n.a];
            const std::size_t m = np.rows * np.cols;
            const double* P = V + np.offset;
            const double* T = V + nodes_[n.b].offset;
            double* gp = G + np.offset;
            double* gt = G + nodes_[n.b].offset;
            const double k = g[0] / static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) {
                const double d = P[i] - T[i];
                const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                gp[i] += k * s;
                gt[i] -= k * s;
            }
            break;
        }
        }
    }
}

} // namespace rnnfc::grad
