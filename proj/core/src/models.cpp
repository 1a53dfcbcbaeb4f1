#include "gfd/models.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include "gfd/math.hpp"

namespace gfd {

namespace {

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }
double polygamma(int m, double x) { return boost::math::polygamma(m, x); }

} // namespace

void ParamDomain::require(double theta, const char* who) const {
    if (!std::isfinite(theta) || !contains(theta))
        throw DomainError(std::string(who) + ": theta outside open parameter domain");
}

ModelSpec ModelSpec::from_id(std::string_view id, double q) {
    ModelSpec m;
    if (id == "location-normal") m.family = Family::LocationNormal;
    else if (id == "uniform-location") m.family = Family::UniformLocation;
    else if (id == "scale-exponential") m.family = Family::ScaleExponential;
    else if (id == "gamma-shape") m.family = Family::GammaShape;
    else if (id == "scaled-normal") m.family = Family::ScaledNormal;
    else if (id == "bivnorm-rho") m.family = Family::BivNormRho;
    else throw InputError("unknown model id: " + std::string(id));
    m.q = q;
    if (m.family == Family::ScaledNormal && !(q > 0.0))
        throw InputError("scaled-normal requires q > 0");
    return m;
}

std::string ModelSpec::id() const {
    switch (family) {
        case Family::LocationNormal: return "location-normal";
        case Family::UniformLocation: return "uniform-location";
        case Family::ScaleExponential: return "scale-exponential";
        case Family::GammaShape: return "gamma-shape";
        case Family::ScaledNormal: return "scaled-normal";
        case Family::BivNormRho: return "bivnorm-rho";
    }
    return "?";
}

ParamDomain ModelSpec::domain() const {
    switch (family) {
        case Family::LocationNormal:
        case Family::UniformLocation: return {-kInf, kInf};
        case Family::ScaleExponential:
        case Family::GammaShape:
        case Family::ScaledNormal: return {0.0, kInf};
        case Family::BivNormRho: return {-1.0, 1.0};
    }
    return {-kInf, kInf};
}

Sample Sample::scalar(std::vector<double> values) {
    Sample s;
    s.x_ = std::move(values);
    if (s.x_.empty()) throw InputError("Sample: empty observation list");
    s.finalize();
    return s;
}

Sample Sample::pairs(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.empty())
        throw InputError("Sample: paired observations must be non-empty and equal length");
    Sample s;
    s.x_ = std::move(x);
    s.y_ = std::move(y);
    s.finalize();
    return s;
}

void Sample::finalize() {
    const int n = static_cast<int>(x_.size());
    double sx = 0, sx2 = 0, slog = 0;
    min_ = kInf;
    max_ = -kInf;
    has_log_ = true;
    for (double v : x_) {
        if (!std::isfinite(v)) throw InputError("Sample: non-finite observation");
        sx += v;
        sx2 += v * v;
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
        if (v > 0.0) slog += std::log(v); else has_log_ = false;
    }
    mean_ = sx / n;
    mean_sq_ = sx2 / n;
    mean_log_ = has_log_ ? slog / n : kNaN;
    double ss = 0;
    for (double v : x_) ss += (v - mean_) * (v - mean_);
    var_unb_ = n > 1 ? ss / (n - 1) : 0.0;

    if (!y_.empty()) {
        double sp = 0, sm = 0, sxy = 0, sqq = 0;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(y_[i])) throw InputError("Sample: non-finite observation");
            const double p = x_[i] + y_[i], m = x_[i] - y_[i];
            sp += p * p;
            sm += m * m;
            sxy += x_[i] * y_[i];
            sqq += x_[i] * x_[i] + y_[i] * y_[i];
        }
        v1_ = sp / (2.0 * n);
        v2_ = sm / (2.0 * n);
        mean_cross_ = sxy / n;
        mean_sumsq_ = sqq / n;
    }
}

double Sample::mean_log() const {
    if (!has_log_) throw InputError("Sample: log-statistics need all-positive observations");
    return mean_log_;
}

double Sample::sd_unbiased() const { return std::sqrt(var_unb_); }

void validate_sample(const ModelSpec& model, const Sample& sample) {
    if (model.bivariate() != sample.bivariate())
        throw InputError("sample arity does not match the model");
    if (model.family == Family::GammaShape && sample.min() <= 0.0)
        throw InputError("gamma-shape observations must be positive");
}

// ---------------------------------------------------------------------------
// log-likelihood and derivatives
// ---------------------------------------------------------------------------

double log_likelihood(const ModelSpec& model, const Sample& sample, double theta) {
    validate_sample(model, sample);
    model.domain().require(theta, "log_likelihood");
    switch (model.family) {
        case Family::LocationNormal: {
            const double m2 = sample.mean_sq(), xb = sample.mean();
            return -0.5 * kLog2Pi - 0.5 * (m2 - 2.0 * theta * xb + theta * theta);
        }
        case Family::UniformLocation: {
            return (theta <= sample.min() && sample.max() <= theta + 1.0) ? 0.0 : -kInf;
        }
        case Family::ScaleExponential: {
            if (sample.min() <= 0.0) throw InputError("scale-exponential needs positive data");
            return -std::log(theta) - sample.mean() / theta;
        }
        case Family::GammaShape: {
            return -sample.mean() + (theta - 1.0) * sample.mean_log() - std::lgamma(theta);
        }
        case Family::ScaledNormal: {
            const double q = model.q;
            const double m2 = sample.mean_sq(), xb = sample.mean();
            const double quad = m2 - 2.0 * theta * xb + theta * theta;
            return -0.5 * kLog2Pi - 0.5 * q * std::log(theta) -
                   0.5 * quad * std::pow(theta, -q);
        }
        case Family::BivNormRho: {
            const double P = sample.mean_sumsq(), M = sample.mean_cross();
            const double r = 1.0 - theta * theta;
            return -kLog2Pi - 0.5 * std::log(r) - (P - 2.0 * theta * M) / (2.0 * r);
        }
    }
    throw UnsupportedError("log_likelihood: unreachable");
}

double log_likelihood_deriv(const ModelSpec& model, const Sample& sample, double theta,
                            int order) {
    validate_sample(model, sample);
    if (order < 1 || order > 4)
        throw InputError("log_likelihood_deriv: order must be in 1..4");
    model.domain().require(theta, "log_likelihood_deriv");
    switch (model.family) {
        case Family::LocationNormal: {
            switch (order) {
                case 1: return sample.mean() - theta;
                case 2: return -1.0;
                default: return 0.0;
            }
        }
        case Family::UniformLocation:
            throw UnsupportedError("uniform-location likelihood is not differentiable");
        case Family::ScaleExponential: {
            const double xb = sample.mean(), t = theta;
            switch (order) {
                case 1: return -1.0 / t + xb / (t * t);
                case 2: return 1.0 / (t * t) - 2.0 * xb / (t * t * t);
                case 3: return -2.0 / (t * t * t) + 6.0 * xb / (t * t * t * t);
                default: return 6.0 / (t * t * t * t) - 24.0 * xb / std::pow(t, 5);
            }
        }
        case Family::GammaShape: {
            switch (order) {
                case 1: return sample.mean_log() - digamma(theta);
                case 2: return -trigamma(theta);
                case 3: return -polygamma(2, theta);
                default: return -polygamma(3, theta);
            }
        }
        case Family::ScaledNormal: {
            // L = -log(2pi)/2 - (q/2) log mu - (m2 - 2 mu xb + mu^2) / (2 mu^q);
            // derivatives are linear in (xb, m2), assembled from the per-point form
            // with u := x - mu replaced by its sample moments.
            const double q = model.q, mu = theta;
            const double xb = sample.mean(), m2 = sample.mean_sq();
            const double u1 = xb - mu;                          // mean of u
            const double u2 = m2 - 2.0 * mu * xb + mu * mu;     // mean of u^2
            const double pq = std::pow(mu, -q);
            switch (order) {
                case 1:
                    return -q / (2.0 * mu) + u1 * pq + 0.5 * q * u2 * pq / mu;
                case 2:
                    return q / (2.0 * mu * mu) - pq - 2.0 * q * u1 * pq / mu -
                           0.5 * q * (q + 1.0) * u2 * pq / (mu * mu);
                case 3:
                    return -q / (mu * mu * mu) + 3.0 * q * pq / mu +
                           3.0 * q * (q + 1.0) * u1 * pq / (mu * mu) +
                           0.5 * q * (q + 1.0) * (q + 2.0) * u2 * pq / (mu * mu * mu);
                default:
                    return 3.0 * q / (mu * mu * mu * mu) -
                           6.0 * q * (q + 1.0) * pq / (mu * mu) -
                           4.0 * q * (q + 1.0) * (q + 2.0) * u1 * pq / (mu * mu * mu) -
                           0.5 * q * (q + 1.0) * (q + 2.0) * (q + 3.0) * u2 * pq /
                               (mu * mu * mu * mu);
            }
        }
        case Family::BivNormRho: {
            const double P = sample.mean_sumsq(), M = sample.mean_cross(), r = theta;
            const double r2 = r * r;
            const double d = r2 - 1.0;  // always negative inside the domain
            switch (order) {
                case 1:
                    return (M * (r2 + 1.0) - P * r - r * r2 + r) / (d * d);
                case 2:
                    return (-2.0 * M * r * r2 - 6.0 * M * r + 3.0 * P * r2 + P + r2 * r2 -
                            1.0) / (d * d * d);
                case 3:
                    return 2.0 *
                           (12.0 * r * r2 * (2.0 * M * r - P) -
                            2.0 * r * d * (12.0 * M * r - 3.0 * P + 2.0 * r2) +
                            3.0 * (M + r) * d * d) /
                           (d * d * d * d);
                default:
                    return 6.0 *
                           (32.0 * r2 * r2 * (-2.0 * M * r + P) +
                            8.0 * r2 * d * (10.0 * M * r - 3.0 * P + r2) + d * d * d +
                            2.0 * d * d * (-10.0 * M * r + P - 4.0 * r2)) /
                           (d * d * d * d * d);
            }
        }
    }
    throw UnsupportedError("log_likelihood_deriv: unreachable");
}

// ---------------------------------------------------------------------------
// MLE
// ---------------------------------------------------------------------------

namespace {

MleResult finish_mle(const ModelSpec& model, const Sample& sample, double theta_hat,
                     int iterations) {
    MleResult r;
    r.theta_hat = theta_hat;
    r.c = -log_likelihood_deriv(model, sample, theta_hat, 2);
    r.l3 = log_likelihood_deriv(model, sample, theta_hat, 3);
    r.l4 = log_likelihood_deriv(model, sample, theta_hat, 4);
    r.iterations = iterations;
    r.converged = r.c > 0.0 && std::isfinite(r.theta_hat);
    if (!r.converged)
        throw ConvergenceError("mle: no interior maximum with positive curvature at theta_hat=" +
                               std::to_string(theta_hat));
    return r;
}

/// Coarse scan of L_n followed by bisection/Newton refinement of the score.
/// Used for the families whose score can have several roots.
MleResult scan_and_refine(const ModelSpec& model, const Sample& sample, double lo,
                          double hi, bool log_spaced) {
    constexpr int kScan = 512;
    auto L = [&](double t) { return log_likelihood(model, sample, t); };
    auto score = [&](double t) { return log_likelihood_deriv(model, sample, t, 1); };

    double best_t = kNaN, best_v = -kInf;
    std::vector<double> grid(kScan);
    for (int i = 0; i < kScan; ++i) {
        double t;
        if (log_spaced) {
            const double llo = std::log(lo), lhi = std::log(hi);
            t = std::exp(llo + (lhi - llo) * i / (kScan - 1.0));
        } else {
            t = lo + (hi - lo) * i / (kScan - 1.0);
        }
        grid[i] = t;
        const double v = L(t);
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    if (!std::isfinite(best_v)) throw ConvergenceError("mle: likelihood not finite on scan grid");

    // bracket the score sign change around the best grid point
    const auto it = std::lower_bound(grid.begin(), grid.end(), best_t);
    const int idx = static_cast<int>(it - grid.begin());
    double a = grid[std::max(0, idx - 1)];
    double b = grid[std::min(kScan - 1, idx + 1)];
    double fa = score(a), fb = score(b);
    int iters = kScan;
    if (fa * fb > 0.0) {
        // best point adjacent to a boundary of the scan; widen once
        a = grid[std::max(0, idx - 2)];
        b = grid[std::min(kScan - 1, idx + 2)];
        fa = score(a);
        fb = score(b);
        if (fa * fb > 0.0)
            throw ConvergenceError("mle: score sign change not bracketed near scan maximum");
    }

    // safeguarded Newton: fall back to bisection whenever the step leaves [a,b]
    double t = 0.5 * (a + b);
    for (int k = 0; k < 100; ++k) {
        ++iters;
        const double s = score(t);
        if (std::abs(s) < 1e-12 * std::max(1.0, std::abs(t))) break;
        if (s * fa < 0.0) { b = t; fb = s; } else { a = t; fa = s; }
        const double d2 = log_likelihood_deriv(model, sample, t, 2);
        double step = d2 != 0.0 ? -s / d2 : kNaN;
        double tn = t + step;
        if (!std::isfinite(tn) || tn <= a || tn >= b) tn = 0.5 * (a + b);
        if (std::abs(tn - t) < 1e-15 * std::max(1.0, std::abs(t))) { t = tn; break; }
        t = tn;
    }
    return finish_mle(model, sample, t, iters);
}

} // namespace

MleResult mle(const ModelSpec& model, const Sample& sample) {
    validate_sample(model, sample);
    if (sample.n() < 2) throw InputError("mle: needs n >= 2");
    switch (model.family) {
        case Family::LocationNormal:
            return finish_mle(model, sample, sample.mean(), 0);
        case Family::UniformLocation: {
            // flat likelihood on the support box; report its midpoint, with a
            // curvature surrogate matched to the box width for bracket sizing
            const double lo = sample.max() - 1.0, hi = sample.min();
            if (!(hi > lo)) throw DegenerateSampleError("uniform-location: empty support box");
            MleResult r;
            r.theta_hat = 0.5 * (lo + hi);
            r.c = 1.0 / (sample.n() * (hi - lo) * (hi - lo));
            r.l3 = r.l4 = 0.0;
            r.converged = true;
            return r;
        }
        case Family::ScaleExponential:
            return finish_mle(model, sample, sample.mean(), 0);
        case Family::GammaShape: {
            // psi(theta) = mean log x, psi strictly increasing onto R
            const double target = sample.mean_log();
            double lo = 1e-8, hi = 1.0;
            while (digamma(hi) < target && hi < 1e12) hi *= 2.0;
            while (digamma(lo) > target && lo > 1e-300) lo *= 0.5;
            double t = std::clamp(std::exp(target) + 0.5, lo, hi);  // rough start
            int iters = 0;
            for (int k = 0; k < 200; ++k) {
                ++iters;
                const double g = digamma(t) - target;
                if (g > 0.0) hi = t; else lo = t;
                const double step = g / trigamma(t);
                double tn = t - step;
                if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
                if (std::abs(tn - t) < 1e-14 * std::max(1.0, t)) { t = tn; break; }
                t = tn;
            }
            return finish_mle(model, sample, t, iters);
        }
        case Family::ScaledNormal: {
            const double scale = std::max({std::abs(sample.mean()), sample.sd_unbiased(), 1.0});
            return scan_and_refine(model, sample, 1e-6 * scale, 100.0 * scale, true);
        }
        case Family::BivNormRho: {
            const double d = 1e-9;
            return scan_and_refine(model, sample, -1.0 + d, 1.0 - d, false);
        }
    }
    throw UnsupportedError("mle: unreachable");
}

// ---------------------------------------------------------------------------
// Fisher information, m3
// ---------------------------------------------------------------------------

double fisher_info(const ModelSpec& model, double theta, int order) {
    model.domain().require(theta, "fisher_info");
    if (order < 0 || order > 2) throw InputError("fisher_info: order must be 0, 1 or 2");
    switch (model.family) {
        case Family::LocationNormal:
            return order == 0 ? 1.0 : 0.0;
        case Family::UniformLocation:
            throw UnsupportedError("fisher_info: undefined for the non-regular uniform-location family");
        case Family::ScaleExponential: {
            switch (order) {
                case 0: return 1.0 / (theta * theta);
                case 1: return -2.0 / (theta * theta * theta);
                default: return 6.0 / (theta * theta * theta * theta);
            }
        }
        case Family::GammaShape: {
            switch (order) {
                case 0: return trigamma(theta);
                case 1: return polygamma(2, theta);
                default: return polygamma(3, theta);
            }
        }
        case Family::ScaledNormal: {
            const double q = model.q, mu = theta;
            switch (order) {
                case 0: return std::pow(mu, -q) + 0.5 * q * q / (mu * mu);
                case 1: return -q * std::pow(mu, -q - 1.0) - q * q / (mu * mu * mu);
                default:
                    return q * (q + 1.0) * std::pow(mu, -q - 2.0) +
                           3.0 * q * q / (mu * mu * mu * mu);
            }
        }
        case Family::BivNormRho: {
            const double r = theta, r2 = r * r;
            const double v = 1.0 - r2;
            switch (order) {
                case 0: return (1.0 + r2) / (v * v);
                case 1: return 2.0 * r * (3.0 + r2) / (v * v * v);
                default: return 6.0 * (1.0 + 6.0 * r2 + r2 * r2) / (v * v * v * v);
            }
        }
    }
    throw UnsupportedError("fisher_info: unreachable");
}

double m3(const ModelSpec& model, double theta) {
    model.domain().require(theta, "m3");
    switch (model.family) {
        case Family::LocationNormal:
            return 0.0;
        case Family::UniformLocation:
            throw UnsupportedError("m3: undefined for the non-regular uniform-location family");
        case Family::ScaleExponential:
            // E[-2/t^3 + 6 X / t^4] with E X = t
            return 4.0 / (theta * theta * theta);
        case Family::GammaShape:
            return -polygamma(2, theta);
        case Family::ScaledNormal: {
            const double q = model.q, mu = theta;
            return -q / (mu * mu * mu) + 3.0 * q * std::pow(mu, -q - 1.0) +
                   0.5 * q * (q + 1.0) * (q + 2.0) / (mu * mu * mu);
        }
        case Family::BivNormRho: {
            const double r = theta, v = 1.0 - r * r;
            return -4.0 * r * (r * r + 3.0) / (v * v * v);
        }
    }
    throw UnsupportedError("m3: unreachable");
}

double m3_deriv(const ModelSpec& model, double theta) {
    model.domain().require(theta, "m3_deriv");
    switch (model.family) {
        case Family::LocationNormal:
            return 0.0;
        case Family::UniformLocation:
            throw UnsupportedError("m3_deriv: undefined for uniform-location");
        case Family::ScaleExponential:
            return -12.0 / (theta * theta * theta * theta);
        case Family::GammaShape:
            return -polygamma(3, theta);
        case Family::ScaledNormal: {
            const double q = model.q, mu = theta;
            return 3.0 * q / (mu * mu * mu * mu) - 3.0 * q * (q + 1.0) * std::pow(mu, -q - 2.0) -
                   1.5 * q * (q + 1.0) * (q + 2.0) / (mu * mu * mu * mu);
        }
        case Family::BivNormRho: {
            const double r = theta, v = 1.0 - r * r;
            const double r2 = r * r;
            return -12.0 * (r2 * r2 + 6.0 * r2 + 1.0) / (v * v * v * v);
        }
    }
    throw UnsupportedError("m3_deriv: unreachable");
}

double m3_gauss_hermite(const ModelSpec& model, double theta, int nodes) {
    model.domain().require(theta, "m3_gauss_hermite");
    const GaussHermiteRule rule(nodes);
    switch (model.family) {
        case Family::LocationNormal: {
            auto g = [&](double x) {
                return log_likelihood_deriv(model, Sample::scalar({x}), theta, 3);
            };
            return rule.expect(g, theta, 1.0);
        }
        case Family::ScaledNormal: {
            auto g = [&](double x) {
                return log_likelihood_deriv(model, Sample::scalar({x}), theta, 3);
            };
            return rule.expect(g, theta, std::pow(theta, 0.5 * model.q));
        }
        case Family::BivNormRho: {
            // tensor rule over the standardized pair (Z1, Z2)
            const double r = theta, s = std::sqrt(1.0 - r * r);
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double z1 = kSqrt2 * rule.nodes[i];
                double inner = 0.0;
                for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                    const double z2 = kSqrt2 * rule.nodes[j];
                    const double x = z1, y = r * z1 + s * z2;
                    inner += rule.weights[j] *
                             log_likelihood_deriv(model, Sample::pairs({x}, {y}), theta, 3);
                }
                acc += rule.weights[i] * inner;
            }
            return acc / kPi;
        }
        default:
            throw UnsupportedError("m3_gauss_hermite: only the normal-based families");
    }
}

// ---------------------------------------------------------------------------
// sampling / support
// ---------------------------------------------------------------------------

Sample sample_data(const ModelSpec& model, double theta0, int n, Stream& stream) {
    model.domain().require(theta0, "sample_data");
    if (n < 1) throw InputError("sample_data: n >= 1");
    std::vector<double> x(n);
    switch (model.family) {
        case Family::LocationNormal:
            for (auto& v : x) v = theta0 + stream.normal();
            return Sample::scalar(std::move(x));
        case Family::UniformLocation:
            for (auto& v : x) v = theta0 + stream.uniform01();
            return Sample::scalar(std::move(x));
        case Family::ScaleExponential:
            for (auto& v : x) v = theta0 * stream.exponential();
            return Sample::scalar(std::move(x));
        case Family::GammaShape:
            for (auto& v : x) v = stream.gamma(theta0);
            return Sample::scalar(std::move(x));
        case Family::ScaledNormal: {
            const double sd = std::pow(theta0, 0.5 * model.q);
            for (auto& v : x) v = theta0 + sd * stream.normal();
            return Sample::scalar(std::move(x));
        }
        case Family::BivNormRho: {
            std::vector<double> y(n);
            const double s = std::sqrt(1.0 - theta0 * theta0);
            for (int i = 0; i < n; ++i) {
                const double z1 = stream.normal(), z2 = stream.normal();
                x[i] = z1;
                y[i] = theta0 * z1 + s * z2;
            }
            return Sample::pairs(std::move(x), std::move(y));
        }
    }
    throw UnsupportedError("sample_data: unreachable");
}

std::optional<Interval> theta_support(const ModelSpec& model, const Sample& sample) {
    if (model.family != Family::UniformLocation) return std::nullopt;
    const double lo = sample.max() - 1.0, hi = sample.min();
    if (!(hi > lo)) throw DegenerateSampleError("uniform-location: empty support box");
    return Interval{lo, hi};
}

} // namespace gfd
