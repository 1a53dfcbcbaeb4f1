#include "gfd/dge.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/distributions/gamma.hpp>

#include "gfd/math.hpp"
#include "gfd/quadrature.hpp"

namespace gfd {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// t-bar statistic of the scaled-normal family: 1 + q (s - mu) / (2 mu)
double tstat(double s, double mu, double q) { return 1.0 - 0.5 * q + 0.5 * q * s / mu; }

void check_kink_distance(double theta, const std::vector<double>& kinks) {
    for (double k : kinks)
        if (std::abs(theta - k) <= 1e-10 * std::max(1.0, std::abs(k)))
            throw KinkError("jacobian derivative requested at kink theta=" + std::to_string(k), k);
}

// ---------------------------------------------------------------------------
// gamma-shape inverse-cdf machinery
// ---------------------------------------------------------------------------

double gamma_cdf(double x, double theta) { return boost::math::gamma_p(theta, x); }

/// dF/dtheta by Richardson-extrapolated central differences,
/// step 1e-5 * max(1, |theta|).
double gamma_dF_dtheta_fd(double x, double theta) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta));
    auto central = [&](double hh) {
        return (gamma_cdf(x, theta + hh) - gamma_cdf(x, theta - hh)) / (2.0 * hh);
    };
    const double d1 = central(h);
    const double d2 = central(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

/// Truncated log-moments M_k(x, theta) = int_0^x (log t)^k f(t|theta) dt,
/// integrated in s = log t where the integrand is smooth.
struct GammaLogMoments {
    double m[4];
};

GammaLogMoments gamma_log_moments(double x, double theta) {
    const double lg = std::lgamma(theta);
    const double s_hi = std::log(x);
    // integrand peaks at min(s_hi, log theta); cut the left tail 60 nats below
    const double s_lo = std::min(s_hi, std::log(theta)) - std::max(60.0 / theta, 30.0);
    GammaLogMoments out{};
    for (int k = 0; k < 4; ++k) {
        auto f = [&](double s) {
            return std::pow(s, k) * std::exp(theta * s - std::exp(s) - lg);
        };
        out.m[k] = integrate(f, s_lo, s_hi, 1e-12, 1e-300, 600);
    }
    return out;
}

/// (-dF/dtheta)/f and its first two theta-derivatives at one observation x.
/// Assembled from the truncated log-moments; dF/dtheta < 0 throughout.
void gamma_invcdf_ratio(double x, double theta, double out[3]) {
    const double psi = boost::math::digamma(theta);
    const double psi1 = boost::math::trigamma(theta);
    const double psi2 = boost::math::polygamma(2, theta);
    const auto M = gamma_log_moments(x, theta);
    const double F = M.m[0];
    const double Ft = M.m[1] - psi * M.m[0];
    const double Ftt = M.m[2] - 2.0 * psi * M.m[1] + (psi * psi - psi1) * M.m[0];
    const double Fttt = M.m[3] - 3.0 * psi * M.m[2] + 3.0 * (psi * psi - psi1) * M.m[1] +
                        (-psi * psi * psi + 3.0 * psi * psi1 - psi2) * M.m[0];
    (void)F;
    const double lx = std::log(x);
    const double logf = -x + (theta - 1.0) * lx - std::lgamma(theta);
    const double f = std::exp(logf);
    if (f < 1e-300) throw NumericError("gamma invcdf: density underflow at x=" + std::to_string(x));
    const double u = lx - psi;
    out[0] = -Ft / f;
    out[1] = (-Ftt + Ft * u) / f;
    const double N = -Ftt + Ft * u;
    const double Np = -Fttt + Ftt * u - Ft * psi1;
    out[2] = (Np - N * u) / f;
}

/// Limit Jacobian of the gamma inverse-cdf DGE and its derivatives:
/// E_{theta0}[ w(X) (-dF/dtheta)/f(X, theta) ], integrated in log X.
double gamma_invcdf_limit(const std::function<double(double)>& w, double theta0,
                          double theta, int order) {
    const boost::math::gamma_distribution<double> g0(theta0);
    const double x_hi = boost::math::quantile(g0, 1.0 - 1e-13);
    const double lg0 = std::lgamma(theta0);
    const double s_hi = std::log(x_hi);
    const double s_lo = std::min(s_hi, std::log(theta0)) - std::max(60.0 / theta0, 30.0);
    auto f = [&](double s) {
        const double x = std::exp(s);
        double r[3];
        gamma_invcdf_ratio(x, theta, r);
        return w(x) * r[order] * std::exp(theta0 * s - x - lg0);
    };
    return integrate(f, s_lo, s_hi, 1e-9, 1e-300, 400);
}

// per-observation inverse-cdf ratio dF/dtheta / f for the analytic families
double invcdf_ratio(const ModelSpec& model, double x, double theta) {
    switch (model.family) {
        case Family::LocationNormal:
            return -1.0;
        case Family::ScaleExponential:
            return -x / theta;
        case Family::ScaledNormal:
            return -tstat(x, theta, model.q);
        case Family::GammaShape: {
            const double logf = -x + (theta - 1.0) * std::log(x) - std::lgamma(theta);
            const double f = std::exp(logf);
            if (f < 1e-300)
                throw NumericError("gamma invcdf: density underflow at x=" + std::to_string(x));
            return gamma_dF_dtheta_fd(x, theta) / f;
        }
        default:
            throw UnsupportedError("invcdf DGE: scalar exponential-family models only");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// spec plumbing
// ---------------------------------------------------------------------------

DgeSpec DgeSpec::from_id(std::string_view id) {
    if (id == "simple") return {DgeKind::Simple, ""};
    if (id == "suffstat") return {DgeKind::SuffStat, ""};
    if (id == "matched") return {DgeKind::Matched, ""};
    if (id == "jeffreys") return {DgeKind::Jeffreys, ""};
    if (id.rfind("invcdf:", 0) == 0) {
        DgeSpec d{DgeKind::InvCdf, std::string(id.substr(7))};
        invcdf_weight(d.weight_id);  // validate
        return d;
    }
    throw InputError("unknown DGE id: " + std::string(id));
}

DgeSpec DgeSpec::from_method(std::string_view method) {
    if (method == "FS") return from_id("simple");
    if (method == "F1") return from_id("matched");
    if (method == "BJ") return from_id("jeffreys");
    if (method == "suffstat") return from_id("suffstat");
    return from_id(method);  // accept raw DGE ids as methods too
}

std::string DgeSpec::id() const {
    switch (kind) {
        case DgeKind::Simple: return "simple";
        case DgeKind::SuffStat: return "suffstat";
        case DgeKind::Matched: return "matched";
        case DgeKind::InvCdf: return "invcdf:" + weight_id;
        case DgeKind::Jeffreys: return "jeffreys";
    }
    return "?";
}

std::function<double(double)> invcdf_weight(const std::string& weight_id) {
    if (weight_id == "invx") return [](double x) { return 1.0 / x; };
    if (weight_id == "one") return [](double) { return 1.0; };
    throw InputError("unknown invcdf weight id: " + weight_id);
}

void require_valid(const ModelSpec& model, const DgeSpec& dge) {
    const auto bad = [&] {
        throw InputError("DGE '" + dge.id() + "' is not defined for model '" + model.id() + "'");
    };
    switch (model.family) {
        case Family::LocationNormal:
        case Family::ScaleExponential:
            if (dge.kind == DgeKind::SuffStat || dge.kind == DgeKind::Matched) bad();
            break;
        case Family::UniformLocation:
            if (dge.kind != DgeKind::Simple) bad();
            break;
        case Family::GammaShape:
            if (dge.kind != DgeKind::InvCdf && dge.kind != DgeKind::Jeffreys) bad();
            break;
        case Family::ScaledNormal:
            break;  // all kinds available
        case Family::BivNormRho:
            if (dge.kind == DgeKind::InvCdf) bad();
            break;
    }
}

bool degenerate_for(const ModelSpec& model, const DgeSpec& dge, const Sample& sample) {
    if (model.family == Family::ScaledNormal && dge.kind == DgeKind::Matched)
        return sample.mean() <= 0.0;
    if (model.family == Family::BivNormRho &&
        (dge.kind == DgeKind::SuffStat || dge.kind == DgeKind::Matched))
        return sample.v1() <= 0.0 || sample.v2() <= 0.0;
    return false;
}

double jacobian_limit_scaling(const ModelSpec& model, const DgeSpec& dge, int n) {
    if (dge.kind == DgeKind::InvCdf) return 1.0 / n;
    if (dge.kind == DgeKind::Simple) {
        // the printed location/scale/uniform Jacobians are pinned constants in
        // the data, not sums over observations
        if (model.family == Family::LocationNormal ||
            model.family == Family::UniformLocation ||
            model.family == Family::ScaleExponential)
            return 1.0;
        return 1.0 / n;
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// sample Jacobians
// ---------------------------------------------------------------------------

double weighted_invcdf_jacobian(const ModelSpec& model,
                                const std::function<double(double)>& w,
                                const Sample& sample, double theta) {
    model.domain().require(theta, "weighted_invcdf_jacobian");
    validate_sample(model, sample);
    double acc = 0.0;
    for (double x : sample.x()) acc += std::abs(w(x) * invcdf_ratio(model, x, theta));
    return acc;
}

double jacobian(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                double theta) {
    require_valid(model, dge);
    validate_sample(model, sample);
    model.domain().require(theta, "jacobian");

    if (dge.kind == DgeKind::Jeffreys) return std::sqrt(fisher_info(model, theta));
    if (dge.kind == DgeKind::InvCdf)
        return weighted_invcdf_jacobian(model, invcdf_weight(dge.weight_id), sample, theta);

    switch (model.family) {
        case Family::LocationNormal:
        case Family::UniformLocation:
            return 1.0;  // constant Jacobian, proportionality pinned
        case Family::ScaleExponential:
            return 1.0 / theta;
        case Family::ScaledNormal: {
            const double q = model.q;
            switch (dge.kind) {
                case DgeKind::Simple: {
                    double acc = 0.0;
                    for (double x : sample.x()) acc += std::abs(tstat(x, theta, q));
                    if (acc <= 0.0)
                        throw DegenerateSampleError("scaled-normal simple Jacobian vanished");
                    return acc;
                }
                case DgeKind::SuffStat:
                    return std::abs(tstat(sample.mean(), theta, q)) +
                           0.5 * q * sample.sd_unbiased() / theta;
                case DgeKind::Matched: {
                    if (sample.mean() <= 0.0)
                        throw DegenerateSampleError(
                            "scaled-normal matched DGE needs a positive sample mean");
                    return 2.0 * sample.mean() * std::abs(tstat(sample.mean(), theta, q)) +
                           q * q * sample.sd_unbiased() * sample.sd_unbiased() / theta;
                }
                default: break;
            }
            break;
        }
        case Family::BivNormRho: {
            const double r = theta;
            switch (dge.kind) {
                case DgeKind::Simple: {
                    double s = 0.0;
                    const auto& xs = sample.x();
                    const auto& ys = sample.y();
                    for (std::size_t i = 0; i < xs.size(); ++i)
                        s += std::abs(xs[i] - r * ys[i]) + std::abs(r * xs[i] - ys[i]);
                    if (s <= 0.0) throw DegenerateSampleError("bivnorm simple Jacobian vanished");
                    return s / (2.0 * (1.0 - r * r));
                }
                case DgeKind::SuffStat:
                    return sample.v1() / (1.0 + r) + sample.v2() / (1.0 - r);
                case DgeKind::Matched: {
                    if (sample.v1() <= 0.0 || sample.v2() <= 0.0)
                        throw DegenerateSampleError("bivnorm matched DGE needs V1, V2 > 0");
                    return 1.0 / (sample.v1() * (1.0 + r)) + 1.0 / (sample.v2() * (1.0 - r));
                }
                default: break;
            }
            break;
        }
        default: break;
    }
    throw UnsupportedError("jacobian: unhandled (model, dge) pair");
}

// ---------------------------------------------------------------------------
// kinks
// ---------------------------------------------------------------------------

KinkSet kink_points(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                    Interval interval) {
    require_valid(model, dge);
    std::vector<double> pts;
    auto keep = [&](double t) {
        if (t > interval.lower && t < interval.upper && model.domain().contains(t))
            pts.push_back(t);
    };
    if (model.family == Family::ScaledNormal) {
        const double q = model.q;
        // t(s, mu) = 0  <=>  mu = q s / (q - 2)
        auto root = [&](double s) {
            if (q == 2.0) return;  // t = s / mu, no interior zero crossing for s != 0
            keep(q * s / (q - 2.0));
        };
        if (dge.kind == DgeKind::Simple || dge.kind == DgeKind::InvCdf)
            for (double x : sample.x()) root(x);
        else if (dge.kind == DgeKind::SuffStat || dge.kind == DgeKind::Matched)
            root(sample.mean());
    } else if (model.family == Family::BivNormRho && dge.kind == DgeKind::Simple) {
        const auto& xs = sample.x();
        const auto& ys = sample.y();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (ys[i] != 0.0) keep(xs[i] / ys[i]);
            if (xs[i] != 0.0) keep(ys[i] / xs[i]);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return {std::move(pts)};
}

std::vector<double> limit_kink_points(const ModelSpec& model, const DgeSpec& dge,
                                      double theta0, Interval interval) {
    std::vector<double> pts;
    if (model.family == Family::ScaledNormal &&
        (dge.kind == DgeKind::SuffStat || dge.kind == DgeKind::Matched) && model.q != 2.0) {
        const double t = model.q * theta0 / (model.q - 2.0);
        if (t > interval.lower && t < interval.upper && model.domain().contains(t))
            pts.push_back(t);
    }
    return pts;
}

// ---------------------------------------------------------------------------
// sample Jacobian derivatives
// ---------------------------------------------------------------------------

double jacobian_deriv(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                      double theta, int order) {
    require_valid(model, dge);
    if (order < 1 || order > 2) throw InputError("jacobian_deriv: order must be 1 or 2");
    model.domain().require(theta, "jacobian_deriv");

    if (dge.kind == DgeKind::Jeffreys) {
        const double I = fisher_info(model, theta, 0);
        const double I1 = fisher_info(model, theta, 1);
        if (order == 1) return 0.5 * I1 / std::sqrt(I);
        const double I2 = fisher_info(model, theta, 2);
        return 0.5 * I2 / std::sqrt(I) - 0.25 * I1 * I1 / std::pow(I, 1.5);
    }

    const auto dom = model.domain();
    const auto kinks = kink_points(model, dge, sample, Interval{dom.lower, dom.upper});
    check_kink_distance(theta, kinks.points);

    switch (model.family) {
        case Family::LocationNormal:
        case Family::UniformLocation:
            return 0.0;  // constant Jacobians, including weighted inverse-cdf
        case Family::ScaleExponential: {
            double base = 1.0;  // J = base / theta
            if (dge.kind == DgeKind::InvCdf) {
                const auto w = invcdf_weight(dge.weight_id);
                base = 0.0;
                for (double x : sample.x()) base += std::abs(w(x) * x);
            }
            return order == 1 ? -base / (theta * theta) : 2.0 * base / (theta * theta * theta);
        }
        case Family::ScaledNormal: {
            const double q = model.q, mu = theta;
            const double d1f = -0.5 * q / (mu * mu);  // d/dmu of (q s / (2 mu)) per unit s
            const double d2f = q / (mu * mu * mu);
            switch (dge.kind) {
                case DgeKind::Simple: {
                    double acc = 0.0;
                    for (double x : sample.x()) {
                        const double sg = sgn(tstat(x, mu, q));
                        acc += sg * (order == 1 ? d1f * x : d2f * x);
                    }
                    return acc;
                }
                case DgeKind::InvCdf: {
                    const auto w = invcdf_weight(dge.weight_id);
                    double acc = 0.0;
                    for (double x : sample.x()) {
                        const double sg = sgn(tstat(x, mu, q));
                        acc += std::abs(w(x)) * sg * (order == 1 ? d1f * x : d2f * x);
                    }
                    return acc;
                }
                case DgeKind::SuffStat: {
                    const double xb = sample.mean(), s = sample.sd_unbiased();
                    const double sg = sgn(tstat(xb, mu, q));
                    if (order == 1) return sg * d1f * xb - 0.5 * q * s / (mu * mu);
                    return sg * d2f * xb + q * s / (mu * mu * mu);
                }
                case DgeKind::Matched: {
                    const double xb = sample.mean(), s2 = sample.sd_unbiased() * sample.sd_unbiased();
                    const double sg = sgn(tstat(xb, mu, q));
                    if (order == 1) return 2.0 * xb * sg * d1f * xb - q * q * s2 / (mu * mu);
                    return 2.0 * xb * sg * d2f * xb + 2.0 * q * q * s2 / (mu * mu * mu);
                }
                default: break;
            }
            break;
        }
        case Family::BivNormRho: {
            const double r = theta, v = 1.0 - r * r;
            switch (dge.kind) {
                case DgeKind::Simple: {
                    const auto& xs = sample.x();
                    const auto& ys = sample.y();
                    double S = 0.0, S1 = 0.0;  // piecewise-linear sum and its slope
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        S += std::abs(xs[i] - r * ys[i]) + std::abs(r * xs[i] - ys[i]);
                        S1 += -ys[i] * sgn(xs[i] - r * ys[i]) + xs[i] * sgn(r * xs[i] - ys[i]);
                    }
                    const double g = 0.5 / v;
                    const double g1 = r / (v * v);
                    const double g2 = (1.0 + 3.0 * r * r) / (v * v * v);
                    if (order == 1) return S1 * g + S * g1;
                    return 2.0 * S1 * g1 + S * g2;  // S'' = 0 between kinks
                }
                case DgeKind::SuffStat: {
                    const double a = sample.v1(), b = sample.v2();
                    const double p = 1.0 + r, m = 1.0 - r;
                    if (order == 1) return -a / (p * p) + b / (m * m);
                    return 2.0 * a / (p * p * p) + 2.0 * b / (m * m * m);
                }
                case DgeKind::Matched: {
                    const double a = sample.v1(), b = sample.v2();
                    const double p = 1.0 + r, m = 1.0 - r;
                    if (order == 1) return -1.0 / (a * p * p) + 1.0 / (b * m * m);
                    return 2.0 / (a * p * p * p) + 2.0 / (b * m * m * m);
                }
                default: break;
            }
            break;
        }
        default: break;
    }

    if (model.family == Family::GammaShape && dge.kind == DgeKind::InvCdf) {
        // derivative of the exact Jacobian via truncated log-moments; the
        // sampled Jacobian's finite-difference dF/dtheta tracks it to ~1e-9
        const auto w = invcdf_weight(dge.weight_id);
        double acc = 0.0;
        for (double x : sample.x()) {
            double r[3];
            gamma_invcdf_ratio(x, theta, r);
            acc += std::abs(w(x)) * r[order];
        }
        return acc;
    }

    // numeric fallback: kink-aware central differences, step shrunk until no
    // breakpoint is crossed
    double h = fd_step(theta);
    auto crosses = [&](double hh) {
        for (double k : kinks.points)
            if (k > theta - hh && k < theta + hh) return true;
        return !model.domain().contains(theta - hh) || !model.domain().contains(theta + hh);
    };
    while (crosses(h)) h *= 0.5;
    auto J = [&](double t) { return jacobian(model, dge, sample, t); };
    return order == 1 ? richardson_d1(J, theta, h) : richardson_d2(J, theta, h);
}

// ---------------------------------------------------------------------------
// limit Jacobians
// ---------------------------------------------------------------------------

double limit_jacobian(const ModelSpec& model, const DgeSpec& dge, double theta0,
                      double theta, int order) {
    require_valid(model, dge);
    if (order < 0 || order > 2) throw InputError("limit_jacobian: order must be 0..2");
    model.domain().require(theta0, "limit_jacobian");
    model.domain().require(theta, "limit_jacobian");

    if (dge.kind == DgeKind::Jeffreys) {
        const double I = fisher_info(model, theta, 0);
        if (order == 0) return std::sqrt(I);
        const double I1 = fisher_info(model, theta, 1);
        if (order == 1) return 0.5 * I1 / std::sqrt(I);
        const double I2 = fisher_info(model, theta, 2);
        return 0.5 * I2 / std::sqrt(I) - 0.25 * I1 * I1 / std::pow(I, 1.5);
    }

    if (order > 0) {
        const auto k = limit_kink_points(model, dge, theta0,
                                         Interval{model.domain().lower, model.domain().upper});
        check_kink_distance(theta, k);
    }

    switch (model.family) {
        case Family::LocationNormal: {
            if (dge.kind == DgeKind::InvCdf) {
                if (order > 0) return 0.0;  // constant in theta
                const auto w = invcdf_weight(dge.weight_id);
                const GaussHermiteRule rule(128);
                return rule.expect([&](double x) { return std::abs(w(x)); }, theta0, 1.0);
            }
            return order == 0 ? 1.0 : 0.0;
        }
        case Family::UniformLocation:
            return order == 0 ? 1.0 : 0.0;
        case Family::ScaleExponential: {
            if (dge.kind == DgeKind::InvCdf) {
                const auto w = invcdf_weight(dge.weight_id);
                // E_{theta0} |w(X) X| / theta, closed in theta
                const double c0 = integrate(
                    [&](double u) {
                        const double x = theta0 * u;
                        return std::abs(w(x) * x) * std::exp(-u);
                    },
                    0.0, 60.0, 1e-12, 1e-300, 400);
                switch (order) {
                    case 0: return c0 / theta;
                    case 1: return -c0 / (theta * theta);
                    default: return 2.0 * c0 / (theta * theta * theta);
                }
            }
            switch (order) {
                case 0: return 1.0 / theta;
                case 1: return -1.0 / (theta * theta);
                default: return 2.0 / (theta * theta * theta);
            }
        }
        case Family::GammaShape:
            return gamma_invcdf_limit(invcdf_weight(dge.weight_id), theta0, theta, order);
        case Family::ScaledNormal: {
            const double q = model.q, mu = theta, mu0 = theta0;
            const double m = tstat(mu0, mu, q);
            const double m1 = -0.5 * q * mu0 / (mu * mu);
            const double m2 = q * mu0 / (mu * mu * mu);
            const double s_inf = std::pow(mu0, 0.5 * q);
            switch (dge.kind) {
                case DgeKind::Simple: {
                    const double sig = 0.5 * q * s_inf / mu;
                    const double sig1 = -sig / mu;
                    const double sig2 = 2.0 * sig / (mu * mu);
                    if (order == 0) return folded_normal_mean(m, sig);
                    const double dm = folded_normal_mean_dm(m, sig);
                    const double ds = folded_normal_mean_ds(m, sig);
                    if (order == 1) return dm * m1 + ds * sig1;
                    const double h = m / sig;
                    const double h1 = (m1 * sig - m * sig1) / (sig * sig);
                    return dm * m2 + ds * (h1 * m1 + sig2 - h * h1 * sig1);
                }
                case DgeKind::SuffStat: {
                    const double sg = sgn(m);
                    switch (order) {
                        case 0: return std::abs(m) + 0.5 * q * s_inf / mu;
                        case 1: return sg * m1 - 0.5 * q * s_inf / (mu * mu);
                        default: return sg * m2 + q * s_inf / (mu * mu * mu);
                    }
                }
                case DgeKind::Matched: {
                    const double sg = sgn(m);
                    const double c = q * q * std::pow(mu0, q);
                    switch (order) {
                        case 0: return 2.0 * mu0 * std::abs(m) + c / mu;
                        case 1: return 2.0 * mu0 * sg * m1 - c / (mu * mu);
                        default: return 2.0 * mu0 * sg * m2 + 2.0 * c / (mu * mu * mu);
                    }
                }
                case DgeKind::InvCdf: {
                    // E_{mu0} |w(X) t(X, mu)| via the folded form when w == 1,
                    // Gauss-Hermite otherwise
                    const auto w = invcdf_weight(dge.weight_id);
                    const GaussHermiteRule rule(128);
                    auto Jof = [&](double muv) {
                        return rule.expect(
                            [&](double x) { return std::abs(w(x) * tstat(x, muv, q)); }, mu0,
                            std::pow(mu0, 0.5 * q));
                    };
                    if (order == 0) return Jof(mu);
                    const double h = fd_step(mu);
                    return order == 1 ? richardson_d1(Jof, mu, h) : richardson_d2(Jof, mu, h);
                }
                default: break;
            }
            break;
        }
        case Family::BivNormRho: {
            const double r = theta, r0 = theta0;
            switch (dge.kind) {
                case DgeKind::Simple: {
                    const double u = r * r - 2.0 * r * r0 + 1.0;
                    const double v = 1.0 - r * r;
                    const double su = std::sqrt(u);
                    const double J = kSqrt2OverPi * su / v;
                    if (order == 0) return J;
                    const double up = 2.0 * (r - r0);
                    const double t1 = up / (2.0 * u) + 2.0 * r / v;
                    if (order == 1) return J * t1;
                    const double dt1 = (2.0 * u - up * up) / (2.0 * u * u) + 2.0 / v +
                                       4.0 * r * r / (v * v);
                    return J * (t1 * t1 + dt1);
                }
                case DgeKind::SuffStat: {
                    const double a = 1.0 + r0, b = 1.0 - r0;
                    const double p = 1.0 + r, m = 1.0 - r;
                    switch (order) {
                        case 0: return a / p + b / m;
                        case 1: return -a / (p * p) + b / (m * m);
                        default: return 2.0 * a / (p * p * p) + 2.0 * b / (m * m * m);
                    }
                }
                case DgeKind::Matched: {
                    const double a = 1.0 + r0, b = 1.0 - r0;
                    const double p = 1.0 + r, m = 1.0 - r;
                    switch (order) {
                        case 0: return 1.0 / (a * p) + 1.0 / (b * m);
                        case 1: return -1.0 / (a * p * p) + 1.0 / (b * m * m);
                        default: return 2.0 / (a * p * p * p) + 2.0 / (b * m * m * m);
                    }
                }
                default: break;
            }
            break;
        }
    }
    throw UnsupportedError("limit_jacobian: unhandled (model, dge) pair");
}

} // namespace gfd
