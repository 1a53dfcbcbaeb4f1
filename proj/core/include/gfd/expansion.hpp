#ifndef GFD_EXPANSION_HPP
#define GFD_EXPANSION_HPP

#include "gfd/dge.hpp"
#include "gfd/models.hpp"

namespace gfd {

/// Probabilists' Hermite polynomial H_k(x), k = 0..6.
double hermite(int k, double x);

/// int_{-inf}^{a} H_k(y) phi(y) dy computed by quadrature. Equals
/// -H_{k-1}(a) phi(a) (with H_0 = 1) to 1e-10; the identity is the test.
double hermite_integral_check(int k, double a);

/// MLE-centered expansion data of the fiducial density in y = sqrt(nc)(theta - theta_hat).
///
/// The W1 term depends on the true parameter theta0, which is unknown in
/// practice; it is passed explicitly and the whole object is a
/// simulation/diagnostic tool evaluated at a chosen reference value.
struct ExpansionCoeffs {
    double theta_hat = 0, c = 0, a = 0, a4 = 0;
    double A1 = 0, A2 = 0, A3 = 0, A4 = 0, A6 = 0;
    double G1 = 0, G2 = 0, G3 = 0, G4 = 0, G6 = 0;
    double W1 = 0;
    double theta0 = 0;
};

ExpansionCoeffs expansion_coefficients(const ModelSpec& model, const DgeSpec& dge,
                                       const Sample& sample, double theta0);

/// phi(y) (1 + n^{-1/2}(A1 y + A3 y^3)
///          + n^{-1}(A2(y^2-1) + A4(y^4-3) + A6(y^6-15) + W1 y / sqrt(c))).
double density_expansion(const ExpansionCoeffs& coeffs, double y, int n);

struct QuantileExpansion {
    double z = 0;      // (1-alpha) normal quantile
    double beta1 = 0;
    double beta2 = 0;
    double theta_approx = 0;  // theta_hat + (nc)^{-1/2}(z + beta1/sqrt(n) + beta2/n)
};

QuantileExpansion quantile_expansion(const ExpansionCoeffs& coeffs, double alpha, int n);

} // namespace gfd

#endif
