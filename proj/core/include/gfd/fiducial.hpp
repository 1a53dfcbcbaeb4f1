#ifndef GFD_FIDUCIAL_HPP
#define GFD_FIDUCIAL_HPP

#include <cmath>
#include <iosfwd>
#include <vector>

#include "gfd/dge.hpp"
#include "gfd/models.hpp"
#include "gfd/quadrature.hpp"

namespace gfd {

struct QuantileResult {
    double p = 0.0;
    double theta_p = 0.0;
    double cdf_error = 0.0;  // |cdf(theta_p) - p|, <= 1e-8 on success
};

struct EqualTailedInterval {
    double lo = 0.0;
    double hi = 0.0;
    double length = 0.0;
};

struct DensityOptions {
    double tail_rel = 1e-12;       // bracket endpoints must fall below tail_rel * peak
    double quad_rel_tol = 1e-10;   // relative tolerance of the normalizer
    double weight_log_scale = 0.0; // added to log-weight; outputs must not move
    int max_panels = 4096;
    int coarse_scan = 129;         // peak-location grid per bracket attempt
};

/// Normalized weighted-likelihood density over theta:
/// pdf(theta) proportional to exp(n L_n(theta)) * W(theta), with W either a
/// DGE Jacobian or the Jeffreys prior weight. Immutable after construction.
class FiducialDensity {
public:
    static FiducialDensity build(const ModelSpec& model, const DgeSpec& weight,
                                 const Sample& sample, const DensityOptions& opts = {});

    double log_pdf_unnormalized(double theta) const;  // n L_n + log W (+ scale)
    double pdf(double theta) const;
    double cdf(double theta) const;
    QuantileResult quantile(double p) const;
    EqualTailedInterval equal_tailed_interval(double level) const;

    double bracket_lo() const { return lo_; }
    double bracket_hi() const { return hi_; }
    double theta_hat() const { return theta_hat_; }
    double c() const { return c_; }
    double log_normalizer() const { return peak_log_ + std::log(norm_); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    bool edge_warning() const { return edge_warning_; }

    /// CSV dump `theta,pdf,cdf` on a uniform grid over the bracket.
    void dump_csv(std::ostream& os, int grid = 1024) const;

private:
    FiducialDensity() = default;

    double shifted(double theta) const;  // exp(log_pdf_unnormalized - peak_log)
    double partial_mass(double a, double b) const;

    ModelSpec model_;
    DgeSpec weight_;
    Sample sample_;
    DensityOptions opts_;
    double lo_ = 0, hi_ = 0;
    double theta_hat_ = 0, c_ = 0;
    double peak_log_ = 0;
    double norm_ = 0;  // integral of the peak-shifted density over the bracket
    std::vector<double> breakpoints_;
    std::vector<QuadPanel> panels_;
    std::vector<double> cum_;  // cumulative shifted mass before each panel
    bool edge_warning_ = false;
};

/// The Jeffreys prior weight sqrt(I(theta)) as a density weight (method BJ).
inline DgeSpec jeffreys_weight(const ModelSpec& model) {
    const auto dom = model.domain();
    double probe = 0.0;
    if (std::isfinite(dom.lower) && std::isfinite(dom.upper))
        probe = 0.5 * (dom.lower + dom.upper);
    else if (std::isfinite(dom.lower))
        probe = dom.lower + 1.0;
    else if (std::isfinite(dom.upper))
        probe = dom.upper - 1.0;
    fisher_info(model, probe);  // throws for the non-regular families
    return DgeSpec::jeffreys();
}

} // namespace gfd

#endif
