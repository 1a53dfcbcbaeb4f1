#include "gfd/matching.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "gfd/math.hpp"

namespace gfd {

namespace {

// 5-point central stencils with one Richardson level, step eps^{1/3} max(1,|x|)
double stencil_d1(const std::function<double(double)>& f, double x) {
    return richardson_d1(f, x, fd_step(x));
}
double stencil_d2(const std::function<double(double)>& f, double x) {
    return richardson_d2(f, x, fd_step(x));
}

struct JDerivs {
    double j0, j1, j2;
};

JDerivs limit_jacobian_derivs(const ModelSpec& model, const DgeSpec& dge, double theta0,
                              DerivPath path) {
    JDerivs d{};
    d.j0 = limit_jacobian(model, dge, theta0, theta0, 0);
    if (path == DerivPath::Analytic) {
        d.j1 = limit_jacobian(model, dge, theta0, theta0, 1);
        d.j2 = limit_jacobian(model, dge, theta0, theta0, 2);
    } else {
        auto J = [&](double t) { return limit_jacobian(model, dge, theta0, t, 0); };
        d.j1 = stencil_d1(J, theta0);
        d.j2 = stencil_d2(J, theta0);
    }
    return d;
}

} // namespace

std::string to_string(MatchOrder order) {
    switch (order) {
        case MatchOrder::None: return "none";
        case MatchOrder::First: return "first";
        case MatchOrder::Second: return "second";
    }
    return "?";
}

double delta1(const ModelSpec& model, const DgeSpec& dge, double theta0, DerivPath path) {
    require_valid(model, dge);
    model.domain().require(theta0, "delta1");
    const auto J = limit_jacobian_derivs(model, dge, theta0, path);
    const double I = fisher_info(model, theta0, 0);
    const double I1 = fisher_info(model, theta0, 1);
    return (J.j1 / J.j0) / std::sqrt(I) - 0.5 * I1 / std::pow(I, 1.5);
}

double delta2(const ModelSpec& model, const DgeSpec& dge, double theta0, double a0,
              double a1, double alpha, DerivPath path) {
    require_valid(model, dge);
    model.domain().require(theta0, "delta2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("delta2: alpha must lie in (0,1)");

    const double J00 = limit_jacobian(model, dge, theta0, theta0, 0);
    double d_g;   // d/dtheta { I^-2 J m3 } at theta0
    double d2_h;  // d^2/dtheta^2 { J I^-1 } at theta0
    double dlogJ;

    if (path == DerivPath::Analytic) {
        const auto J = limit_jacobian_derivs(model, dge, theta0, DerivPath::Analytic);
        const double I = fisher_info(model, theta0, 0);
        const double I1 = fisher_info(model, theta0, 1);
        const double I2 = fisher_info(model, theta0, 2);
        const double M = m3(model, theta0);
        const double M1 = m3_deriv(model, theta0);
        d_g = -2.0 * std::pow(I, -3.0) * I1 * J.j0 * M + std::pow(I, -2.0) * (J.j1 * M + J.j0 * M1);
        d2_h = J.j2 / I - 2.0 * J.j1 * I1 / (I * I) +
               J.j0 * (2.0 * I1 * I1 / (I * I * I) - I2 / (I * I));
        dlogJ = J.j1 / J.j0;
    } else {
        auto g = [&](double t) {
            return std::pow(fisher_info(model, t, 0), -2.0) *
                   limit_jacobian(model, dge, theta0, t, 0) * m3(model, t);
        };
        auto h = [&](double t) {
            return limit_jacobian(model, dge, theta0, t, 0) / fisher_info(model, t, 0);
        };
        auto J = [&](double t) { return limit_jacobian(model, dge, theta0, t, 0); };
        d_g = stencil_d1(g, theta0);
        d2_h = stencil_d2(h, theta0);
        dlogJ = stencil_d1(J, theta0) / J00;
    }

    double value = (d_g / 6.0 - 0.5 * d2_h) / J00;
    if (a0 != 0.0 || a1 != 0.0) {
        const double z = normal_quantile(1.0 - alpha);
        value += (a1 - a0 * dlogJ) / (std::sqrt(fisher_info(model, theta0, 0)) * z * J00);
    }
    return value;
}

MatchReport match_report(const ModelSpec& model, const DgeSpec& dge, double theta0,
                         double a0, double a1, double alpha, double tol) {
    MatchReport r;
    r.model_id = model.id();
    r.dge_id = dge.id();
    r.theta0 = theta0;
    r.a0 = a0;
    r.a1 = a1;
    r.delta1 = delta1(model, dge, theta0);
    r.delta2 = delta2(model, dge, theta0, a0, a1, alpha);
    if (std::abs(r.delta1) <= tol)
        r.order = std::abs(r.delta2) <= tol ? MatchOrder::Second : MatchOrder::First;
    else
        r.order = MatchOrder::None;
    return r;
}

double scaled_normal_delta2_closed(double mu0, double q) {
    if (!(mu0 > 0.0) || !(q > 0.0))
        throw DomainError("scaled_normal_delta2_closed: mu0 > 0 and q > 0 required");
    const double muq = std::pow(mu0, q);
    const double denom = 2.0 * mu0 * mu0 + muq * q * q;
    return q * (q - 2.0) * std::pow(mu0, q + 2.0) * (2.0 * mu0 * mu0 + muq * q * (q - 1.0)) /
           (denom * denom * denom);
}

std::vector<ContourPoint> delta2_contour(std::span<const double> mu_grid,
                                         std::span<const double> q_grid, int jobs) {
    std::vector<ContourPoint> out(mu_grid.size() * q_grid.size());
    const int rows = static_cast<int>(q_grid.size());
    jobs = std::max(1, jobs);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < rows; r = next.fetch_add(1)) {
            const double q = q_grid[r];
            for (std::size_t i = 0; i < mu_grid.size(); ++i) {
                const double mu = mu_grid[i];
                out[r * mu_grid.size() + i] = {mu, q, scaled_normal_delta2_closed(mu, q)};
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

void write_contour_csv(std::ostream& os, const std::vector<ContourPoint>& points) {
    os << "mu,q,delta2\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.mu, p.q, p.delta2);
        os << buf;
    }
}

double first_order_class_residual(ClassExample example,
                                  const std::function<double(double)>& a1_prime,
                                  const std::function<double(double)>& a2_prime,
                                  double theta, double q) {
    switch (example) {
        case ClassExample::BivNorm: {
            if (!(theta > -1.0 && theta < 1.0))
                throw DomainError("first_order_class_residual: |rho| < 1 required");
            const double p = 1.0 + theta, m = 1.0 - theta;
            return a1_prime(p) - a2_prime(m) * (m * m) / (p * p);
        }
        case ClassExample::ScaledNormal: {
            if (!(theta > 0.0)) throw DomainError("first_order_class_residual: x > 0 required");
            return a2_prime(std::pow(theta, 0.5 * q)) -
                   a1_prime(theta) * q * std::pow(theta, 0.5 * q - 1.0);
        }
    }
    throw UnsupportedError("first_order_class_residual: unreachable");
}

} // namespace gfd
