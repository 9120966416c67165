#include "rnnfc/gradcheck.hpp"

#include "rnnfc/error.hpp"

#include <cmath>
#include <cstring>

namespace rnnfc::grad {

Objective tape_objective(std::function<Var(Tape&, ParameterSet&)> build) {
    return [build = std::move(build)](ParameterSet& params, bool with_gradient) {
        Tape tape;
        Var loss = build(tape, params);
        double value = tape.scalar(loss);
        if (with_gradient) {
            tape.backward(loss);
        }
        return value;
    };
}

GradCheckReport finite_difference_check(const Objective& f, ParameterSet& params, double eps) {
    if (!(eps >= 1e-6 && eps <= 1e-4)) {
        throw ContractError("finite_difference_check: eps must lie in [1e-6, 1e-4]");
    }

    double first = f(params, false);
    double second = f(params, false);
    if (std::memcmp(&first, &second, sizeof first) != 0) {
        throw DeterminismError("finite_difference_check: objective is not deterministic");
    }

    params.zero_grad();
    f(params, true);

    GradCheckReport report;
    for (auto& p : params) {
        auto values = p.value.data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = f(params, false);
            values[i] = saved - eps;
            const double down = f(params, false);
            values[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p.grad[i];
            const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
            ++report.coordinates;
            if (err > report.max_relative_error || report.worst_parameter.empty()) {
                report.max_relative_error = err;
                report.worst_parameter = p.name;
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

} // namespace rnnfc::grad
