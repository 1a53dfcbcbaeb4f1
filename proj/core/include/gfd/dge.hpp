#ifndef GFD_DGE_HPP
#define GFD_DGE_HPP

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "gfd/models.hpp"

namespace gfd {

enum class DgeKind {
    Simple,    // per-observation Jacobian, a sum of absolute derivatives
    SuffStat,  // identity transform of the minimal sufficient statistics
    Matched,   // first-order probability-matching transform of the statistics
    InvCdf,    // inverse-cdf equation with an extra weight w on the data
    Jeffreys,  // prior weight sqrt(I(theta)); Bayes reference, not a DGE proper
};

/// Ordered non-differentiability points of theta -> J_n(X, theta).
struct KinkSet {
    std::vector<double> points;  // strictly increasing
};

struct DgeSpec {
    DgeKind kind = DgeKind::Simple;
    std::string weight_id = "invx";  // InvCdf only

    /// ids: "simple" | "suffstat" | "matched" | "invcdf:<weight-id>" | "jeffreys"
    static DgeSpec from_id(std::string_view id);
    /// method aliases used by the simulation tables: FS, F1, BJ, suffstat
    static DgeSpec from_method(std::string_view method);
    static DgeSpec jeffreys() { return DgeSpec{DgeKind::Jeffreys, ""}; }
    std::string id() const;

    /// true when the limit Jacobian has a closed form (all built-ins except
    /// the inverse-cdf weighted equations, whose limit is an expectation)
    bool analytic_limit() const { return kind != DgeKind::InvCdf; }
};

/// Registered inverse-cdf weights ("invx" -> 1/x, "one" -> 1).
std::function<double(double)> invcdf_weight(const std::string& weight_id);

void require_valid(const ModelSpec& model, const DgeSpec& dge);

/// True when the sample makes this DGE unusable (e.g. the scaled-normal
/// matched Jacobian with non-positive sample mean).
bool degenerate_for(const ModelSpec& model, const DgeSpec& dge, const Sample& sample);

/// J_n(X, theta), proportionality constants pinned to 1.
double jacobian(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                double theta);

/// Analytic (piecewise) theta-derivative of J_n where the form permits,
/// kink-aware central differences otherwise. Throws KinkError at kinks.
double jacobian_deriv(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                      double theta, int order);

/// In-probability limit J(theta0, theta) of the (suitably scaled) Jacobian and
/// its theta-derivatives (order 0..2).
double limit_jacobian(const ModelSpec& model, const DgeSpec& dge, double theta0,
                      double theta, int order = 0);

KinkSet kink_points(const ModelSpec& model, const DgeSpec& dge, const Sample& sample,
                    Interval interval);

/// Kinks of theta -> J(theta0, theta) inside the interval.
std::vector<double> limit_kink_points(const ModelSpec& model, const DgeSpec& dge,
                                      double theta0, Interval interval);

/// sum_i |w(X_i) dF(X_i,theta)/dtheta / f(X_i,theta)|; dF/dtheta analytic for
/// the normal/exponential equations, Richardson central differences for
/// gamma-shape.
double weighted_invcdf_jacobian(const ModelSpec& model,
                                const std::function<double(double)>& w,
                                const Sample& sample, double theta);

/// Scaling that maps J_n to its limit: sums over observations are divided by
/// n, statistic-level and pinned-constant Jacobians are left alone.
double jacobian_limit_scaling(const ModelSpec& model, const DgeSpec& dge, int n);

} // namespace gfd

#endif
