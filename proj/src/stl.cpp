#include "rnnfc/stl.hpp"

#include "rnnfc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rnnfc {

namespace {

double tricube(double r) {
    double t = 1.0 - r * r * r;
    return t * t * t;
}

// Local fit at position xs (0-based) using points [left, right].
// Returns false when every weight vanishes.
bool local_fit(std::span<const double> y, int window, int degree, double xs, std::size_t left,
               std::size_t right, std::vector<double>& w, double& out) {
    const auto n = y.size();
    const double range = static_cast<double>(n) - 1.0;
    double h = std::max(xs - static_cast<double>(left), static_cast<double>(right) - xs);
    if (static_cast<std::size_t>(window) > n) {
        h += static_cast<double>((static_cast<std::size_t>(window) - n) / 2);
    }
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    double total = 0.0;
    for (std::size_t j = left; j <= right; ++j) {
        double r = std::abs(static_cast<double>(j) - xs);
        double wj = 0.0;
        if (r <= h9) {
            wj = r <= h1 ? 1.0 : tricube(r / h);
        }
        w[j - left] = wj;
        total += wj;
    }
    if (total <= 0.0) {
        return false;
    }
    for (std::size_t j = left; j <= right; ++j) {
        w[j - left] /= total;
    }
    if (h > 0.0 && degree > 0) {
        double a = 0.0;
        for (std::size_t j = left; j <= right; ++j) {
            a += w[j - left] * static_cast<double>(j);
        }
        double c = 0.0;
        for (std::size_t j = left; j <= right; ++j) {
            double d = static_cast<double>(j) - a;
            c += w[j - left] * d * d;
        }
        if (std::sqrt(c) > 0.001 * range) {
            double b = (xs - a) / c;
            for (std::size_t j = left; j <= right; ++j) {
                w[j - left] *= b * (static_cast<double>(j) - a) + 1.0;
            }
        }
    }
    double s = 0.0;
    for (std::size_t j = left; j <= right; ++j) {
        s += w[j - left] * y[j];
    }
    out = s;
    return true;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t len) {
    std::vector<double> out;
    if (x.size() < len) {
        return out;
    }
    out.reserve(x.size() - len + 1);
    for (std::size_t i = 0; i + len <= x.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            s += x[i + k];
        }
        out.push_back(s / static_cast<double>(len));
    }
    return out;
}

std::vector<double> phase_means(std::span<const double> x, std::size_t period) {
    std::vector<double> sum(period, 0.0);
    std::vector<std::size_t> count(period, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum[i % period] += x[i];
        ++count[i % period];
    }
    for (std::size_t k = 0; k < period; ++k) {
        sum[k] = count[k] > 0 ? sum[k] / static_cast<double>(count[k]) : 0.0;
    }
    return sum;
}

} // namespace

double Decomposition::seasonal_at(std::size_t index) const {
    if (index < seasonal.size()) {
        return seasonal[index];
    }
    if (seasonal.empty() || period < 1) {
        return 0.0;
    }
    auto p = static_cast<std::size_t>(period);
    if (seasonal.size() < p) {
        return 0.0;
    }
    // Shift back by whole periods into the observed range.
    std::size_t steps = (index - seasonal.size()) / p + 1;
    return seasonal[index - steps * p];
}

int next_odd(double x) {
    auto v = static_cast<int>(std::ceil(x));
    return v % 2 == 0 ? v + 1 : v;
}

std::vector<double> loess_smooth(std::span<const double> y, int window, int degree) {
    const auto n = y.size();
    std::vector<double> ys(y.begin(), y.end());
    if (n < 2) {
        return ys;
    }
    window = std::max(window, 2);
    std::vector<double> w(n);
    const auto len = static_cast<std::size_t>(window);

    if (len >= n) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            if (local_fit(y, window, degree, static_cast<double>(i), 0, n - 1, w, v)) {
                ys[i] = v;
            }
        }
        return ys;
    }

    const std::size_t half = (len + 1) / 2;
    std::size_t left = 0;
    std::size_t right = len - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 > half && right != n - 1) {
            ++left;
            ++right;
        }
        double v = 0.0;
        if (local_fit(y, window, degree, static_cast<double>(i), left, right, w, v)) {
            ys[i] = v;
        }
    }
    return ys;
}

Decomposition stl_periodic(std::span<const double> values, int period, const StlOptions& options) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw NumericError("stl: non-finite input at index " + std::to_string(i));
        }
    }
    if (period < 1) {
        throw ValidationError("stl: period must be >= 1");
    }

    const std::size_t n = values.size();
    const auto p = static_cast<std::size_t>(period);
    const int trend_window = options.trend_window > 0 ? options.trend_window : next_odd(1.5 * period);
    const int lowpass_window = options.lowpass_window > 0 ? options.lowpass_window : next_odd(period);

    Decomposition d;
    d.period = period;
    d.seasonal.assign(n, 0.0);

    if (period < 2 || n < 2 * p) {
        d.trend = loess_smooth(values, trend_window, 1);
    } else {
        std::vector<double> trend(n, 0.0);
        std::vector<double> season(n, 0.0);
        std::vector<double> work(n);
        std::vector<double> cycle(n + 2 * p);

        for (int iter = 0; iter < options.inner_iterations; ++iter) {
            for (std::size_t i = 0; i < n; ++i) {
                work[i] = values[i] - trend[i];
            }
            // Periodic cycle-subseries smoothing reduces to the per-phase mean,
            // extended one period on each side.
            auto means = phase_means(work, p);
            for (std::size_t j = 0; j < cycle.size(); ++j) {
                cycle[j] = means[j % p];
            }
            auto low = moving_average(moving_average(moving_average(cycle, p), p), 3);
            low = loess_smooth(low, lowpass_window, 1);
            for (std::size_t i = 0; i < n; ++i) {
                season[i] = cycle[p + i] - low[i];
                work[i] = values[i] - season[i];
            }
            trend = loess_smooth(work, trend_window, 1);
        }

        auto means = phase_means(season, p);
        for (std::size_t i = 0; i < n; ++i) {
            d.seasonal[i] = means[i % p];
        }
        d.trend = std::move(trend);
    }

    d.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.remainder[i] = values[i] - d.seasonal[i] - d.trend[i];
    }
    return d;
}

} // namespace rnnfc
