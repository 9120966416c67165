#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rnnfc {

/// One tunable dimension: closed interval [lo, hi], optionally integer and/or log-scaled.
struct Dimension {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool integer = false;
    bool log_scale = false;
};

struct SmboTrial {
    std::vector<double> point;
    double value = std::numeric_limits<double>::infinity();
    bool failed = false;
    std::string failure;
    double seconds = 0.0;
};

struct SmboResult {
    std::vector<SmboTrial> trials;
    std::size_t best = 0;
    const SmboTrial& best_trial() const { return trials.at(best); }
};

/// Objective evaluated at a point; throwing NumericError marks the trial as failed.
using SmboObjective = std::function<double(const std::vector<double>& point, std::size_t trial)>;

/// Number of uniformly sampled trials before model-guided proposals start.
std::size_t smbo_initial_trials(std::size_t iterations);

/// Sequential model-based minimisation with a tree-structured Parzen density-ratio
/// surrogate. The initial uniform trials are evaluated on up to `jobs` threads; results
/// do not depend on `jobs`. Throws TuningError when every trial fails.
SmboResult smbo_minimize(const std::vector<Dimension>& space, const SmboObjective& objective,
                         std::size_t iterations, std::uint64_t seed, int jobs = 1);

/// Maps a point in the unit cube onto the dimensions (rounding integers).
std::vector<double> denormalize(const std::vector<Dimension>& space, const std::vector<double>& unit);

} // namespace rnnfc
