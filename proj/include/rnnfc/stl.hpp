#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rnnfc {

/// Additive seasonal/trend/remainder split of one series.
struct Decomposition {
    std::vector<double> seasonal;
    std::vector<double> trend;
    std::vector<double> remainder;
    int period = 1;

    std::size_t size() const { return seasonal.size(); }
    /// Seasonal value at any index, extending the periodic component past the end.
    double seasonal_at(std::size_t index) const;
};

struct StlOptions {
    int inner_iterations = 2;
    int trend_window = 0;    // 0 selects the default: next odd integer >= 1.5 * period
    int lowpass_window = 0;  // 0 selects the default: next odd integer >= period
};

/// Smallest odd integer >= x.
int next_odd(double x);

/// Degree-0/1 local regression with tricube weights over `window` nearest points,
/// evaluated at every index. Mirrors the smoother used inside STL.
std::vector<double> loess_smooth(std::span<const double> y, int window, int degree = 1);

/// STL with a periodic (deterministic) seasonal component and no robustness iterations.
/// Series shorter than two periods, or period 1, get a zero seasonal component.
Decomposition stl_periodic(std::span<const double> values, int period, const StlOptions& options = {});

} // namespace rnnfc
