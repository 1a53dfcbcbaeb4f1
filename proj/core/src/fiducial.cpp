#include "gfd/fiducial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "gfd/math.hpp"

namespace gfd {

namespace {

constexpr double kLogTiny = -745.0;  // below exp() underflow

void append_edges(std::vector<double>& edges, const std::vector<double>& pts, double lo,
                  double hi) {
    for (double p : pts)
        if (p > lo && p < hi) edges.push_back(p);
}

} // namespace

double FiducialDensity::log_pdf_unnormalized(double theta) const {
    const double ll = log_likelihood(model_, sample_, theta);
    if (ll == -kInf) return -kInf;
    const double J = jacobian(model_, weight_, sample_, theta);
    if (!(J > 0.0) || !std::isfinite(J))
        return -kInf;
    return sample_.n() * ll + std::log(J) + opts_.weight_log_scale;
}

double FiducialDensity::shifted(double theta) const {
    const double lu = log_pdf_unnormalized(theta);
    const double e = lu - peak_log_;
    return e < kLogTiny ? 0.0 : std::exp(e);
}

FiducialDensity FiducialDensity::build(const ModelSpec& model, const DgeSpec& weight,
                                       const Sample& sample, const DensityOptions& opts) {
    require_valid(model, weight);
    validate_sample(model, sample);
    if (degenerate_for(model, weight, sample))
        throw DegenerateSampleError("fiducial build: sample degenerate for DGE " + weight.id());

    FiducialDensity d;
    d.model_ = model;
    d.weight_ = weight;
    d.sample_ = sample;
    d.opts_ = opts;

    const MleResult fit = mle(model, sample);
    d.theta_hat_ = fit.theta_hat;
    d.c_ = fit.c;

    const ParamDomain dom = model.domain();
    const double edge_pad = 1e-12;
    const double dom_lo = std::isfinite(dom.lower) ? dom.lower + edge_pad : -kInf;
    const double dom_hi = std::isfinite(dom.upper) ? dom.upper - edge_pad : kInf;

    const auto support = theta_support(model, sample);
    const double log_tail = std::log(opts.tail_rel);

    double lo, hi;
    bool clip_lo = false, clip_hi = false;
    if (support) {
        lo = std::max(support->lower, dom_lo);
        hi = std::min(support->upper, dom_hi);
        clip_lo = clip_hi = true;  // density vanishes outside the box by construction
        d.peak_log_ = -kInf;
    } else {
        const double half0 = 8.0 / std::sqrt(sample.n() * fit.c);
        double k = 1.0;
        for (int attempt = 0;; ++attempt, k *= 2.0) {
            lo = d.theta_hat_ - k * half0;
            hi = d.theta_hat_ + k * half0;
            clip_lo = lo <= dom_lo;
            clip_hi = hi >= dom_hi;
            if (clip_lo) lo = dom_lo;
            if (clip_hi) hi = dom_hi;

            // locate the peak on a coarse grid (the weight can tilt it off theta_hat)
            d.peak_log_ = -kInf;
            const int m = std::max(9, opts.coarse_scan);
            for (int i = 0; i <= m; ++i) {
                const double t = lo + (hi - lo) * i / m;
                d.peak_log_ = std::max(d.peak_log_, d.log_pdf_unnormalized(t));
            }
            if (dom.contains(d.theta_hat_) && d.theta_hat_ > lo && d.theta_hat_ < hi)
                d.peak_log_ = std::max(d.peak_log_, d.log_pdf_unnormalized(d.theta_hat_));
            if (!std::isfinite(d.peak_log_))
                throw BuildError("fiducial build: density has no finite peak on the bracket");

            const bool lo_ok = clip_lo || d.log_pdf_unnormalized(lo) - d.peak_log_ < log_tail;
            const bool hi_ok = clip_hi || d.log_pdf_unnormalized(hi) - d.peak_log_ < log_tail;
            if (lo_ok && hi_ok) break;
            if (attempt >= 8)
                throw BuildError("fiducial build: bracket did not close after 8 doublings");
        }
    }
    if (!(hi > lo)) throw BuildError("fiducial build: empty bracket");
    d.lo_ = lo;
    d.hi_ = hi;

    // peak for the support-box families (flat likelihood): scan once
    if (support) {
        const int m = std::max(9, opts.coarse_scan);
        for (int i = 0; i <= m; ++i) {
            const double t = lo + (hi - lo) * i / m;
            d.peak_log_ = std::max(d.peak_log_, d.log_pdf_unnormalized(t));
        }
        if (!std::isfinite(d.peak_log_))
            throw BuildError("fiducial build: density vanishes on its support box");
    }

    // segment edges: bracket ends, interior kinks, theta_hat
    std::vector<double> edges{lo, hi};
    const auto kinks = kink_points(model, weight, sample, Interval{lo, hi});
    append_edges(edges, kinks.points, lo, hi);
    if (d.theta_hat_ > lo && d.theta_hat_ < hi) edges.push_back(d.theta_hat_);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    d.breakpoints_.assign(edges.begin() + 1, edges.end() - 1);

    auto g = [&d](double t) { return d.shifted(t); };
    d.panels_ = adaptive_gk(g, edges, opts.quad_rel_tol, 1e-300, opts.max_panels);
    double total = 0.0;
    for (const auto& p : d.panels_) total += p.integral;
    if (!(total > 0.0) || !std::isfinite(total))
        throw BuildError("fiducial build: normalizer is zero or non-finite");
    d.norm_ = total;

    d.cum_.resize(d.panels_.size() + 1);
    d.cum_[0] = 0.0;
    for (std::size_t i = 0; i < d.panels_.size(); ++i)
        d.cum_[i + 1] = d.cum_[i] + d.panels_[i].integral;

    if (!support) {
        const double thr = std::log(opts.tail_rel);
        if (clip_lo && d.log_pdf_unnormalized(lo) - d.peak_log_ >= thr) d.edge_warning_ = true;
        if (clip_hi && d.log_pdf_unnormalized(hi) - d.peak_log_ >= thr) d.edge_warning_ = true;
    }
    return d;
}

double FiducialDensity::pdf(double theta) const {
    if (theta <= lo_ || theta >= hi_) {
        model_.domain().require(theta, "pdf");
        return 0.0;
    }
    return shifted(theta) / norm_;
}

double FiducialDensity::partial_mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    auto g = [this](double t) { return shifted(t); };
    const auto panels = adaptive_gk(g, {a, b}, 1e-10, 1e-14 * norm_, 80);
    double acc = 0.0;
    for (const auto& p : panels) acc += p.integral;
    return acc;
}

double FiducialDensity::cdf(double theta) const {
    model_.domain().require(theta, "cdf");
    if (theta <= lo_) return 0.0;
    if (theta >= hi_) return 1.0;
    auto it = std::upper_bound(panels_.begin(), panels_.end(), theta,
                               [](double t, const QuadPanel& p) { return t < p.b; });
    if (it == panels_.end()) return 1.0;
    const std::size_t idx = static_cast<std::size_t>(it - panels_.begin());
    const double mass = cum_[idx] + partial_mass(panels_[idx].a, theta);
    return std::clamp(mass / norm_, 0.0, 1.0);
}

QuantileResult FiducialDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
    const double target = p * norm_;

    // the quantile lies inside the panel whose cumulative range holds the
    // target; cdf is monotone, so it cannot leave that panel
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin());
    idx = idx == 0 ? 0 : std::min(idx - 1, panels_.size() - 1);

    double a = panels_[idx].a, b = panels_[idx].b;
    const double base = cum_[idx];
    double t = 0.5 * (a + b);
    double err = kInf;
    for (int it = 0; it < 200; ++it) {
        const double resid = base + partial_mass(panels_[idx].a, t) - target;
        err = std::abs(resid) / norm_;
        if (err <= 5e-10) break;
        if (resid > 0.0) b = t; else a = t;
        const double dens = shifted(t);  // safeguarded Newton, bisection fallback
        double tn = dens > 0.0 ? t - resid / dens : kNaN;
        if (!std::isfinite(tn) || tn <= a || tn >= b) tn = 0.5 * (a + b);
        if (tn == t) break;
        t = tn;
    }
    if (err > 1e-8)
        throw NumericError("quantile: cdf residual " + std::to_string(err) +
                           " above tolerance at p=" + std::to_string(p));
    return {p, t, err};
}

EqualTailedInterval FiducialDensity::equal_tailed_interval(double level) const {
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("equal_tailed_interval: level must lie in (0,1)");
    const double a = 0.5 * (1.0 - level);
    const QuantileResult qlo = quantile(a);
    const QuantileResult qhi = quantile(1.0 - a);
    return {qlo.theta_p, qhi.theta_p, qhi.theta_p - qlo.theta_p};
}

void FiducialDensity::dump_csv(std::ostream& os, int grid) const {
    os << "theta,pdf,cdf\n";
    char buf[128];
    for (int i = 0; i < grid; ++i) {
        const double t = lo_ + (hi_ - lo_) * i / (grid - 1.0);
        const double tt = std::min(std::max(t, std::nextafter(lo_, hi_)),
                                   std::nextafter(hi_, lo_));
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, pdf(tt), cdf(tt));
        os << buf;
    }
}

} // namespace gfd
