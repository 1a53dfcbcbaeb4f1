#ifndef GFD_MATCHING_HPP
#define GFD_MATCHING_HPP

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gfd/dge.hpp"
#include "gfd/models.hpp"

namespace gfd {

enum class MatchOrder { None, First, Second };

std::string to_string(MatchOrder order);

struct MatchReport {
    std::string model_id;
    std::string dge_id;
    double theta0 = 0;
    double delta1 = 0;
    double delta2 = 0;
    double a0 = 0;
    double a1 = 0;
    MatchOrder order = MatchOrder::None;
};

/// How the limit-Jacobian theta-derivatives entering Delta1/Delta2 are formed:
/// closed forms, or pure central-difference stencils on the order-0 limit.
enum class DerivPath { Analytic, FiniteDifference };

/// Delta1 = [I^{-1/2} d/dtheta log J(theta0, theta) + d/dtheta I^{-1/2}] at theta0.
double delta1(const ModelSpec& model, const DgeSpec& dge, double theta0,
              DerivPath path = DerivPath::Analytic);

/// Delta2 = J00^{-1} [ (1/6) d/dtheta { I^{-2} J m3 } - (1/2) d^2/dtheta^2 { J I^{-1} } ]
///          + I^{-1/2} / (z_alpha J00) [ a1 - a0 d/dtheta log J ]   (all at theta0).
double delta2(const ModelSpec& model, const DgeSpec& dge, double theta0, double a0 = 0.0,
              double a1 = 0.0, double alpha = 0.05, DerivPath path = DerivPath::Analytic);

MatchReport match_report(const ModelSpec& model, const DgeSpec& dge, double theta0,
                         double a0 = 0.0, double a1 = 0.0, double alpha = 0.05,
                         double tol = 1e-7);

/// Closed form for the scaled-normal first-order class:
/// q (q-2) mu^{q+2} (2 mu^2 + mu^q q (q-1)) / (2 mu^2 + mu^q q^2)^3.
double scaled_normal_delta2_closed(double mu0, double q);

struct ContourPoint {
    double mu = 0;
    double q = 0;
    double delta2 = 0;
};

/// Row-major (q outer, mu inner) grid of the closed form.
std::vector<ContourPoint> delta2_contour(std::span<const double> mu_grid,
                                         std::span<const double> q_grid, int jobs = 1);

/// CSV `mu,q,delta2` with 17 significant digits.
void write_contour_csv(std::ostream& os, const std::vector<ContourPoint>& points);

enum class ClassExample { BivNorm, ScaledNormal };

/// Residual of the first-order class identity for a transform-derivative pair:
/// bivnorm:       A1'(1+t) - A2'(1-t) (1-t)^2 / (1+t)^2
/// scaled-normal: A2'(t^{q/2}) - A1'(t) q t^{q/2-1}
double first_order_class_residual(ClassExample example,
                                  const std::function<double(double)>& a1_prime,
                                  const std::function<double(double)>& a2_prime,
                                  double theta, double q = 1.0);

} // namespace gfd

#endif
