#include "rnnfc/smbo.hpp"

#include "rnnfc/error.hpp"
#include "rnnfc/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace rnnfc {

namespace {

constexpr double kGamma = 0.25;          // fraction of trials treated as "good"
constexpr std::size_t kCandidates = 24;  // candidates drawn from the good density per proposal
constexpr double kMinBandwidth = 0.05;

void validate_space(const std::vector<Dimension>& space) {
    if (space.empty()) {
        throw ContractError("smbo: empty search space");
    }
    for (const auto& d : space) {
        if (!(d.lo <= d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi)) {
            throw ContractError("smbo: dimension '" + d.name + "' has an invalid range");
        }
        if (d.log_scale && d.lo <= 0.0) {
            throw ContractError("smbo: log-scaled dimension '" + d.name + "' needs lo > 0");
        }
    }
}

double to_unit(const Dimension& d, double v) {
    if (d.hi == d.lo) {
        return 0.5;
    }
    if (d.log_scale) {
        return (std::log(v) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo));
    }
    return (v - d.lo) / (d.hi - d.lo);
}

// Parzen estimator in the unit cube: Gaussian kernels around observations plus one
// uniform prior component.
struct Parzen {
    std::vector<std::vector<double>> centers;
    std::vector<double> bandwidth;

    Parzen(std::vector<std::vector<double>> pts, std::size_t dims) : centers(std::move(pts)), bandwidth(dims) {
        const double n = static_cast<double>(centers.size());
        for (std::size_t j = 0; j < dims; ++j) {
            double mean = 0.0;
            for (const auto& c : centers) {
                mean += c[j];
            }
            mean /= std::max(n, 1.0);
            double var = 0.0;
            for (const auto& c : centers) {
                var += (c[j] - mean) * (c[j] - mean);
            }
            const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.5;
            bandwidth[j] = std::clamp(1.06 * sd * std::pow(std::max(n, 1.0), -0.2), kMinBandwidth, 1.0);
        }
    }

    double log_density(const std::vector<double>& x) const {
        const double w = 1.0 / static_cast<double>(centers.size() + 1);
        double total = w;  // uniform prior has density 1 on the cube
        for (const auto& c : centers) {
            double p = 1.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double z = (x[j] - c[j]) / bandwidth[j];
                p *= std::exp(-0.5 * z * z) / (bandwidth[j] * std::sqrt(2.0 * M_PI));
            }
            total += w * p;
        }
        return std::log(total);
    }

    std::vector<double> sample(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> x(bandwidth.size());
        std::uniform_int_distribution<std::size_t> pick(0, centers.size());
        const std::size_t k = pick(rng);
        if (k == centers.size()) {
            for (auto& v : x) {
                v = unit(rng);
            }
            return x;
        }
        for (std::size_t j = 0; j < x.size(); ++j) {
            std::normal_distribution<double> kernel(centers[k][j], bandwidth[j]);
            double v = kernel(rng);
            for (int tries = 0; (v < 0.0 || v > 1.0) && tries < 16; ++tries) {
                v = kernel(rng);
            }
            x[j] = std::clamp(v, 0.0, 1.0);
        }
        return x;
    }
};

SmboTrial run_trial(const SmboObjective& objective, std::vector<double> point, std::size_t index) {
    SmboTrial t;
    t.point = std::move(point);
    const auto start = std::chrono::steady_clock::now();
    try {
        t.value = objective(t.point, index);
        if (!std::isfinite(t.value)) {
            t.failed = true;
            t.failure = "non-finite objective value";
        }
    } catch (const NumericError& e) {
        t.failed = true;
        t.failure = e.what();
    }
    if (t.failed) {
        t.value = std::numeric_limits<double>::infinity();
    }
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return t;
}

} // namespace

std::size_t smbo_initial_trials(std::size_t iterations) {
    return std::min(iterations, std::max<std::size_t>(10, iterations / 5));
}

std::vector<double> denormalize(const std::vector<Dimension>& space, const std::vector<double>& unit) {
    std::vector<double> out(space.size());
    for (std::size_t j = 0; j < space.size(); ++j) {
        const auto& d = space[j];
        const double u = std::clamp(unit[j], 0.0, 1.0);
        double v = d.log_scale ? std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)))
                               : d.lo + u * (d.hi - d.lo);
        if (d.integer) {
            // Uniform over the integers lo..hi: split [0,1] into hi-lo+1 equal cells.
            const double cells = std::floor(d.hi) - std::ceil(d.lo) + 1.0;
            v = std::ceil(d.lo) + std::min(std::floor(u * cells), cells - 1.0);
        }
        out[j] = std::clamp(v, d.lo, d.hi);
    }
    return out;
}

SmboResult smbo_minimize(const std::vector<Dimension>& space, const SmboObjective& objective,
                         std::size_t iterations, std::uint64_t seed, int jobs) {
    validate_space(space);
    if (iterations < 1) {
        throw ContractError("smbo: iterations must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t initial = smbo_initial_trials(iterations);
    std::vector<std::vector<double>> first;
    for (std::size_t i = 0; i < initial; ++i) {
        std::vector<double> u(space.size());
        for (auto& v : u) {
            v = unit(rng);
        }
        first.push_back(denormalize(space, u));
    }

    SmboResult result;
    result.trials = parallel_map(initial, jobs, [&](std::size_t i) { return run_trial(objective, first[i], i); });

    for (std::size_t i = initial; i < iterations; ++i) {
        std::vector<std::size_t> ok;
        for (std::size_t t = 0; t < result.trials.size(); ++t) {
            if (!result.trials[t].failed) {
                ok.push_back(t);
            }
        }
        std::vector<double> proposal(space.size());
        if (ok.size() < 2) {
            for (auto& v : proposal) {
                v = unit(rng);
            }
        } else {
            std::stable_sort(ok.begin(), ok.end(),
                             [&](std::size_t a, std::size_t b) { return result.trials[a].value < result.trials[b].value; });
            const std::size_t n_good =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kGamma * static_cast<double>(ok.size()))));
            std::vector<std::vector<double>> good;
            std::vector<std::vector<double>> bad;
            for (std::size_t r = 0; r < ok.size(); ++r) {
                std::vector<double> u(space.size());
                for (std::size_t j = 0; j < space.size(); ++j) {
                    u[j] = to_unit(space[j], result.trials[ok[r]].point[j]);
                }
                (r < n_good ? good : bad).push_back(std::move(u));
            }
            // Failed trials count as bad observations.
            for (std::size_t t = 0; t < result.trials.size(); ++t) {
                if (result.trials[t].failed) {
                    std::vector<double> u(space.size());
                    for (std::size_t j = 0; j < space.size(); ++j) {
                        u[j] = to_unit(space[j], result.trials[t].point[j]);
                    }
                    bad.push_back(std::move(u));
                }
            }
            Parzen l(good, space.size());
            Parzen g(bad, space.size());
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kCandidates; ++c) {
                auto x = l.sample(rng);
                const double score = l.log_density(x) - g.log_density(x);
                if (score > best_score) {
                    best_score = score;
                    proposal = x;
                }
            }
        }
        result.trials.push_back(run_trial(objective, denormalize(space, proposal), i));
    }

    bool any = false;
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        if (!result.trials[t].failed && (!any || result.trials[t].value < result.trials[result.best].value)) {
            result.best = t;
            any = true;
        }
    }
    if (!any) {
        std::string log;
        for (std::size_t t = 0; t < result.trials.size(); ++t) {
            log += "\n  trial " + std::to_string(t + 1) + ": " + result.trials[t].failure;
        }
        throw TuningError("all " + std::to_string(result.trials.size()) + " tuning trials failed:" + log);
    }
    return result;
}

} // namespace rnnfc
