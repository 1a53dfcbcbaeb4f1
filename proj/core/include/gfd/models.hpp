#ifndef GFD_MODELS_HPP
#define GFD_MODELS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

/// Open parameter interval; evaluation points must lie strictly inside.
struct ParamDomain {
    double lower;
    double upper;

    bool contains(double theta) const { return theta > lower && theta < upper; }
    void require(double theta, const char* who) const;
};

struct Interval {
    double lower;
    double upper;
};

enum class Family {
    LocationNormal,    // N(theta, 1)
    UniformLocation,   // U(theta, theta + 1), non-regular; exactness checks only
    ScaleExponential,  // Exp with scale theta
    GammaShape,        // Gamma(theta, 1)
    ScaledNormal,      // N(mu, mu^q), mu > 0, q > 0 fixed
    BivNormRho,        // bivariate N(0, [[1, rho], [rho, 1]])
};

/// One-parameter family plus its fixed hyperparameter.
struct ModelSpec {
    Family family = Family::LocationNormal;
    double q = 1.0;  // scaled-normal exponent; ignored elsewhere

    static ModelSpec from_id(std::string_view id, double q = 1.0);
    std::string id() const;
    ParamDomain domain() const;
    bool bivariate() const { return family == Family::BivNormRho; }
};

/// Observations with cached sufficient statistics.
///
/// Scalar families use x only; the bivariate-normal family pairs x with y.
/// n = 1 is allowed for pointwise evaluation; estimation requires n >= 2.
class Sample {
public:
    static Sample scalar(std::vector<double> values);
    static Sample pairs(std::vector<double> x, std::vector<double> y);

    int n() const { return static_cast<int>(x_.size()); }
    bool bivariate() const { return !y_.empty(); }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

    // scalar caches
    double mean() const { return mean_; }
    double mean_sq() const { return mean_sq_; }
    double mean_log() const;          // requires all-positive observations
    double min() const { return min_; }
    double max() const { return max_; }
    double sd_unbiased() const;       // sqrt of the divisor-(n-1) variance

    // bivariate caches: V1 = (1/2n) sum (x+y)^2, V2 = (1/2n) sum (x-y)^2,
    // mean_cross = (1/n) sum x*y, mean_sumsq = (1/n) sum (x^2 + y^2)
    double v1() const { return v1_; }
    double v2() const { return v2_; }
    double mean_cross() const { return mean_cross_; }
    double mean_sumsq() const { return mean_sumsq_; }

private:
    std::vector<double> x_, y_;
    double mean_ = 0, mean_sq_ = 0, mean_log_ = 0, min_ = 0, max_ = 0, var_unb_ = 0;
    double v1_ = 0, v2_ = 0, mean_cross_ = 0, mean_sumsq_ = 0;
    bool has_log_ = false;
    void finalize();
};

struct MleResult {
    double theta_hat = 0.0;
    double c = 0.0;   // observed information per observation, -L_n''(theta_hat)
    double l3 = 0.0;  // L_n^(3)(theta_hat)
    double l4 = 0.0;  // L_n^(4)(theta_hat)
    bool converged = false;
    int iterations = 0;
};

/// L_n(theta) = (1/n) sum log f(X_i | theta).
double log_likelihood(const ModelSpec& model, const Sample& sample, double theta);

/// Exact theta-derivative of L_n, orders 1..4.
double log_likelihood_deriv(const ModelSpec& model, const Sample& sample, double theta,
                            int order);

MleResult mle(const ModelSpec& model, const Sample& sample);

/// I(theta) and its first two derivatives (order = 0, 1, 2).
double fisher_info(const ModelSpec& model, double theta, int order = 0);

/// m3(theta) = E_theta[d^3/dtheta^3 log f(X, theta)].
double m3(const ModelSpec& model, double theta);
double m3_deriv(const ModelSpec& model, double theta);

/// Gauss-Hermite evaluation of m3 for the normal-based families; the analytic
/// path above is primary, this is the quadrature cross-check.
double m3_gauss_hermite(const ModelSpec& model, double theta, int nodes = 128);

Sample sample_data(const ModelSpec& model, double theta0, int n, Stream& stream);

/// Exact theta-support induced by the sample, for families whose likelihood
/// has data-dependent support (uniform-location box). Empty otherwise.
std::optional<Interval> theta_support(const ModelSpec& model, const Sample& sample);

void validate_sample(const ModelSpec& model, const Sample& sample);

} // namespace gfd

#endif
