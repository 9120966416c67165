#pragma once

#include "rnnfc/tape.hpp"

#include <functional>
#include <string>

namespace rnnfc::grad {

/// Scalar objective over a parameter set. When `with_gradient` is true the objective must
/// also add d(objective)/d(parameter) into each Parameter::grad.
using Objective = std::function<double(ParameterSet&, bool with_gradient)>;

/// Builds an Objective from a function that records the loss on a fresh tape.
Objective tape_objective(std::function<Var(Tape&, ParameterSet&)> build);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
};

/// Compares analytic gradients with central differences coordinate by coordinate:
/// |analytic - numeric| / max(1, |numeric|), maximised over all coordinates.
/// Parameter values are restored on return.
GradCheckReport finite_difference_check(const Objective& f, ParameterSet& params, double eps = 1e-5);

} // namespace rnnfc::grad
