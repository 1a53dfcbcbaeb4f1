#include "gfd/expansion.hpp"

#include <cmath>

#include "gfd/math.hpp"
#include "gfd/quadrature.hpp"

namespace gfd {

double hermite(int k, double x) {
    switch (k) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return x * x - 1.0;
        case 3: return x * (x * x - 3.0);
        case 4: return x * x * (x * x - 6.0) + 3.0;
        case 5: return x * (x * x * (x * x - 10.0) + 15.0);
        case 6: return x * x * (x * x * (x * x - 15.0) + 45.0) - 15.0;
        default: throw InputError("hermite: order k must be 0..6");
    }
}

double hermite_integral_check(int k, double a) {
    if (k < 1 || k > 6) throw InputError("hermite_integral_check: k must be 1..6");
    auto f = [k](double y) { return hermite(k, y) * normal_pdf(y); };
    const double lo = std::min(a, 0.0) - 40.0;
    return integrate(f, lo, a, 1e-13, 1e-14, 2000);
}

ExpansionCoeffs expansion_coefficients(const ModelSpec& model, const DgeSpec& dge,
                                       const Sample& sample, double theta0) {
    const MleResult fit = mle(model, sample);
    ExpansionCoeffs e;
    e.theta_hat = fit.theta_hat;
    e.c = fit.c;
    e.a = fit.l3;
    e.a4 = fit.l4;
    e.theta0 = theta0;

    const double J = limit_jacobian(model, dge, theta0, fit.theta_hat, 0);
    const double J1 = limit_jacobian(model, dge, theta0, fit.theta_hat, 1);
    const double J2 = limit_jacobian(model, dge, theta0, fit.theta_hat, 2);

    const double sc = std::sqrt(fit.c);
    e.A1 = J1 / (J * sc);
    e.A2 = 0.5 * J2 / (J * fit.c);
    e.A3 = fit.l3 / (6.0 * fit.c * sc);
    e.A4 = e.A1 * e.A3 + fit.l4 / (24.0 * fit.c * fit.c);
    e.A6 = 0.5 * e.A3 * e.A3;

    e.G1 = e.A1 + 3.0 * e.A3;
    e.G2 = e.A2 + 6.0 * e.A4 + 45.0 * e.A6;
    e.G3 = e.A3;
    e.G4 = e.A4 + 15.0 * e.A6;
    e.G6 = e.A6;

    const double Jn = jacobian(model, dge, sample, fit.theta_hat);
    const double Jn1 = jacobian_deriv(model, dge, sample, fit.theta_hat, 1);
    e.W1 = std::sqrt(static_cast<double>(sample.n())) * (Jn1 / Jn - J1 / J);
    return e;
}

double density_expansion(const ExpansionCoeffs& c, double y, int n) {
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    const double y2 = y * y;
    const double first = c.A1 * y + c.A3 * y * y2;
    const double second = c.A2 * (y2 - 1.0) + c.A4 * (y2 * y2 - 3.0) +
                          c.A6 * (y2 * y2 * y2 - 15.0) + c.W1 * y / std::sqrt(c.c);
    return normal_pdf(y) * (1.0 + rn * first + rn * rn * second);
}

QuantileExpansion quantile_expansion(const ExpansionCoeffs& c, double alpha, int n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("quantile_expansion: alpha must lie in (0,1)");
    QuantileExpansion q;
    q.z = normal_quantile(1.0 - alpha);
    q.beta1 = c.G1 + c.G3 * hermite(2, q.z);
    q.beta2 = 2.0 * q.z * q.beta1 * c.G3 - 0.5 * q.beta1 * q.beta1 * q.z +
              c.G2 * hermite(1, q.z) + c.G4 * hermite(3, q.z) + c.G6 * hermite(5, q.z) +
              c.W1 / std::sqrt(c.c);
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    q.theta_approx =
        c.theta_hat + (q.z + rn * q.beta1 + rn * rn * q.beta2) / std::sqrt(n * c.c);
    return q;
}

} // namespace gfd
