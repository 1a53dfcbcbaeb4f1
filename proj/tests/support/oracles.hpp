// Test-only oracles, independent of the library code paths they check:
// finite differences, brute-force grid maximization, Monte Carlo means.
#ifndef GFD_TESTS_ORACLES_HPP
#define GFD_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include <gfd/models.hpp>
#include <gfd/rng.hpp>

namespace oracles {

/// Plain central difference (no Richardson), the textbook oracle.
inline double central_d1(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_d2(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Argmax of f over a uniform step grid on [lo, hi].
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                          double step) {
    double best_x = lo, best_v = f(lo);
    for (double x = lo + step; x <= hi; x += step) {
        const double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return best_x;
}

struct McEstimate {
    double mean = 0;
    double se = 0;
};

/// Monte Carlo mean and standard error of g(X) under the model at theta.
inline McEstimate mc_mean(const gfd::ModelSpec& model, double theta, long draws,
                          std::uint64_t seed,
                          const std::function<double(const gfd::Sample&)>& g) {
    gfd::Stream stream(seed, 0, 0);
    double sum = 0, sumsq = 0;
    for (long i = 0; i < draws; ++i) {
        const auto s = gfd::sample_data(model, theta, 1, stream);
        const double v = g(s);
        sum += v;
        sumsq += v * v;
    }
    McEstimate e;
    e.mean = sum / draws;
    e.se = std::sqrt((sumsq / draws - e.mean * e.mean) / draws);
    return e;
}

} // namespace oracles

#endif
