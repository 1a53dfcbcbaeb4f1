#ifndef GFD_MATH_HPP
#define GFD_MATH_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "gfd/errors.hpp"

namespace gfd {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

/// Inverse standard normal cdf.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    static const boost::math::normal_distribution<double> unit{};
    return boost::math::quantile(unit, p);
}

/// E|Y| for Y ~ N(m, s^2): folded normal mean.
inline double folded_normal_mean(double m, double s) {
    const double h = m / s;
    return s * kSqrt2OverPi * std::exp(-0.5 * h * h) + m * std::erf(h / kSqrt2);
}

/// d/dm E|Y| = erf(m / (sqrt(2) s)); d/ds E|Y| = sqrt(2/pi) exp(-m^2/(2s^2)).
inline double folded_normal_mean_dm(double m, double s) {
    return std::erf(m / (kSqrt2 * s));
}
inline double folded_normal_mean_ds(double m, double s) {
    const double h = m / s;
    return kSqrt2OverPi * std::exp(-0.5 * h * h);
}

/// Central difference step for order-1/2 numeric derivatives.
inline double fd_step(double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    return std::cbrt(eps) * std::max(1.0, std::abs(x));
}

/// Five-point central first derivative with one Richardson extrapolation level.
inline double richardson_d1(const std::function<double(double)>& f, double x, double h) {
    auto central = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
    const double d1 = central(h);
    const double d2 = central(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

/// Five-point central second derivative with one Richardson extrapolation level.
inline double richardson_d2(const std::function<double(double)>& f, double x, double h) {
    auto central = [&](double hh) {
        return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh);
    };
    const double d1 = central(h);
    const double d2 = central(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

/// Gauss-Hermite rule for the physicists' weight exp(-x^2) on (-inf, inf).
/// Nodes by Newton iteration on the three-term recurrence.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermiteRule(int n) : nodes(n), weights(n) {
        const double tol = 1e-15;
        const int m = (n + 1) / 2;
        double z = 0.0;
        for (int i = 0; i < m; ++i) {
            // asymptotic initial guesses (Numerical Recipes gauher)
            if (i == 0) {
                z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
            } else if (i == 1) {
                z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
            } else if (i == 2) {
                z = 1.86 * z - 0.86 * nodes[0];
            } else if (i == 3) {
                z = 1.91 * z - 0.91 * nodes[1];
            } else {
                z = 2.0 * z - nodes[i - 2];
            }
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                const double pim4 = 0.7511255444649425;  // pi^(-1/4)
                double p1 = pim4, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                         std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) <= tol) break;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }

    /// E[g(X)] for X ~ N(mean, sd^2).
    double expect(const std::function<double(double)>& g, double mean, double sd) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * g(mean + kSqrt2 * sd * nodes[i]);
        return acc / std::sqrt(kPi);
    }
};

} // namespace gfd

#endif
