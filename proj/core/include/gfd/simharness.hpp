#ifndef GFD_SIMHARNESS_HPP
#define GFD_SIMHARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gfd/fiducial.hpp"

namespace gfd {

struct SimConfig {
    ModelSpec model;
    std::vector<double> theta0s;
    std::vector<int> ns;
    std::vector<std::string> methods;  // FS | F1 | BJ | suffstat | raw DGE ids
    std::vector<double> alphas{0.025, 0.05, 0.5, 0.95, 0.975};
    std::vector<double> levels{0.90, 0.95};
    int reps = 5000;
    std::uint64_t seed = 0;
    int jobs = 1;
    DensityOptions density{};
};

struct CoverageRow {
    std::string model_id;
    std::string method;
    double theta0 = 0;
    int n = 0;
    std::string metric;  // one-sided-coverage | two-sided-coverage | length | mad
    double alpha = 0;    // alpha for one-sided, level for two-sided, 0.5 for mad
    double value = 0;
    double mc_se = 0;
    int reps = 0;
    std::uint64_t seed = 0;
    int failures = 0;
};

enum MetricMask : unsigned {
    kOneSided = 1u,
    kTwoSided = 2u,
    kMad = 4u,
    kAllMetrics = 7u,
};

/// Per-replication quantiles of one simulation cell, in fixed replication
/// order; the building block every aggregate is derived from.
struct CellDetail {
    std::vector<double> p_grid;           // sorted unique probabilities
    std::vector<std::vector<double>> quantiles;  // [rep][p index]
    int failures = 0;                     // redrawn attempts across all reps
};

CellDetail run_cell_detail(const ModelSpec& model, const DgeSpec& dge, double theta0,
                           int n, const std::vector<double>& p_grid, int reps,
                           std::uint64_t seed, int jobs,
                           const DensityOptions& density = {});

std::vector<CoverageRow> run_simulation(const SimConfig& config,
                                        unsigned metrics = kAllMetrics);
std::vector<CoverageRow> run_one_sided(const SimConfig& config);
std::vector<CoverageRow> run_two_sided(const SimConfig& config);
std::vector<CoverageRow> run_mad(const SimConfig& config);

struct ExactnessCell {
    CoverageRow row;
    double nominal = 0;
    double tolerance = 0;  // 4 binomial SE at the nominal level
    bool pass = false;
};

struct ExactnessResult {
    std::vector<ExactnessCell> cells;
    int cells_checked = 0;
    bool pass = false;
};

/// Empirical one-sided exactness for the families whose GFD is exact:
/// gamma-shape (w = 1/x), location-normal, scale-exponential, uniform-location
/// at theta0 = 2, 0, 1, 1 and n in {2, 3, 5, 10}.
ExactnessResult exactness_suite(int reps, std::uint64_t seed, int jobs,
                                const std::vector<int>& ns = {2, 3, 5, 10});

/// CSV with `#`-prefixed header lines followed by
/// model,method,theta0,n,metric,alpha,value,mc_se,reps,seed,failures.
void write_csv(std::ostream& os, const std::vector<std::string>& header_comments,
               const std::vector<CoverageRow>& rows);

std::string format_double(double v);  // %.17g, shared by all CSV writers

} // namespace gfd

#endif
