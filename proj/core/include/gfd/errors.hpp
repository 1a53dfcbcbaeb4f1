#ifndef GFD_ERRORS_HPP
#define GFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfd {

/// Parameter or probability outside its admissible open interval.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed observations (non-finite values, arity mismatch, wrong support).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sample renders a quantity undefined (e.g. a Jacobian identically zero,
/// or a sign-restricted statistic on the wrong side).
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Derivative requested at a non-differentiability point of a Jacobian.
class KinkError : public std::runtime_error {
public:
    KinkError(const std::string& what, double where)
        : std::runtime_error(what), kink(where) {}
    double kink;
};

/// Root finder / optimizer failed to locate an interior solution.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature or other numeric routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Density construction failed (non-integrable weight, empty support, ...).
class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Monte Carlo experiment violated its failure budget.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not defined for the requested model (non-regular families).
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gfd

#endif
