#include "gfd/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "gfd/math.hpp"

namespace gfd {

namespace {

constexpr int kMaxRetries = 100;

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    jobs = std::clamp(jobs, 1, std::max(1, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::scoped_lock lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> dedup_sorted(std::vector<double> ps) {
    std::sort(ps.begin(), ps.end());
    std::vector<double> out;
    for (double p : ps) {
        if (!(p > 0.0 && p < 1.0))
            throw InputError("simulation probabilities must lie in (0,1)");
        if (out.empty() || p - out.back() > 1e-9) out.push_back(p);
    }
    return out;
}

std::size_t grid_index(const std::vector<double>& grid, double p) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - p) <= 1e-9) return i;
    throw NumericError("internal: probability not on the cell grid");
}

double sample_se(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (v.size() - 1) / v.size());
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CellDetail run_cell_detail(const ModelSpec& model, const DgeSpec& dge, double theta0,
                           int n, const std::vector<double>& p_grid, int reps,
                           std::uint64_t seed, int jobs, const DensityOptions& density) {
    require_valid(model, dge);
    if (reps < 1) throw InputError("run_cell_detail: reps >= 1");

    CellDetail detail;
    detail.p_grid = p_grid;
    detail.quantiles.assign(reps, {});
    std::vector<int> retries(reps, 0);

    parallel_for(reps, jobs, [&](int r) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > kMaxRetries)
                throw ExperimentError("replication " + std::to_string(r) + " failed " +
                                      std::to_string(kMaxRetries) + " redraws");
            Stream stream(seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(attempt));
            const Sample sample = sample_data(model, theta0, n, stream);
            if (degenerate_for(model, dge, sample)) {
                ++retries[r];
                continue;
            }
            try {
                const FiducialDensity density_fit =
                    FiducialDensity::build(model, dge, sample, density);
                std::vector<double> qs(p_grid.size());
                for (std::size_t k = 0; k < p_grid.size(); ++k)
                    qs[k] = density_fit.quantile(p_grid[k]).theta_p;
                detail.quantiles[r] = std::move(qs);
                return;
            } catch (const DegenerateSampleError&) {
            } catch (const BuildError&) {
            } catch (const ConvergenceError&) {
            } catch (const NumericError&) {
            }
            ++retries[r];
        }
    });

    for (int r = 0; r < reps; ++r) detail.failures += retries[r];
    if (detail.failures > 0.01 * reps)
        throw ExperimentError("cell (" + model.id() + ", " + dge.id() + ", theta0=" +
                              std::to_string(theta0) + ", n=" + std::to_string(n) + "): " +
                              std::to_string(detail.failures) +
                              " redraws exceed 1% of replications");
    return detail;
}

std::vector<CoverageRow> run_simulation(const SimConfig& config, unsigned metrics) {
    if (config.reps < 1) throw InputError("SimConfig: reps >= 1");
    for (double a : config.alphas)
        if (!(a > 0.0 && a < 1.0)) throw InputError("SimConfig: alphas must lie in (0,1)");
    for (double l : config.levels)
        if (!(l > 0.0 && l < 1.0)) throw InputError("SimConfig: levels must lie in (0,1)");

    // shared probability grid per cell
    std::vector<double> ps;
    if (metrics & kOneSided)
        ps.insert(ps.end(), config.alphas.begin(), config.alphas.end());
    if (metrics & kTwoSided)
        for (double l : config.levels) {
            ps.push_back(0.5 * (1.0 - l));
            ps.push_back(1.0 - 0.5 * (1.0 - l));
        }
    if (metrics & kMad) ps.push_back(0.5);
    const std::vector<double> p_grid = dedup_sorted(std::move(ps));

    std::vector<CoverageRow> rows;
    for (double theta0 : config.theta0s) {
        for (int n : config.ns) {
            for (const std::string& method : config.methods) {
                const DgeSpec dge = DgeSpec::from_method(method);
                const CellDetail cell =
                    run_cell_detail(config.model, dge, theta0, n, p_grid, config.reps,
                                    config.seed, config.jobs, config.density);
                auto base_row = [&](const char* metric, double alpha) {
                    CoverageRow row;
                    row.model_id = config.model.id();
                    row.method = method;
                    row.theta0 = theta0;
                    row.n = n;
                    row.metric = metric;
                    row.alpha = alpha;
                    row.reps = config.reps;
                    row.seed = config.seed;
                    row.failures = cell.failures;
                    return row;
                };

                if (metrics & kOneSided) {
                    for (double a : config.alphas) {
                        const std::size_t k = grid_index(p_grid, a);
                        double hits = 0;
                        for (const auto& qs : cell.quantiles) hits += theta0 <= qs[k];
                        CoverageRow row = base_row("one-sided-coverage", a);
                        row.value = hits / config.reps;
                        row.mc_se = std::sqrt(row.value * (1.0 - row.value) / config.reps);
                        rows.push_back(std::move(row));
                    }
                }
                if (metrics & kTwoSided) {
                    for (double l : config.levels) {
                        const std::size_t klo = grid_index(p_grid, 0.5 * (1.0 - l));
                        const std::size_t khi = grid_index(p_grid, 1.0 - 0.5 * (1.0 - l));
                        double hits = 0;
                        std::vector<double> lengths(cell.quantiles.size());
                        for (std::size_t r = 0; r < cell.quantiles.size(); ++r) {
                            const auto& qs = cell.quantiles[r];
                            hits += qs[klo] <= theta0 && theta0 <= qs[khi];
                            lengths[r] = qs[khi] - qs[klo];
                        }
                        CoverageRow cov = base_row("two-sided-coverage", l);
                        cov.value = hits / config.reps;
                        cov.mc_se = std::sqrt(cov.value * (1.0 - cov.value) / config.reps);
                        rows.push_back(std::move(cov));

                        double mean_len = 0;
                        for (double v : lengths) mean_len += v;
                        mean_len /= lengths.size();
                        CoverageRow len = base_row("length", l);
                        len.value = mean_len;
                        len.mc_se = sample_se(lengths, mean_len);
                        rows.push_back(std::move(len));
                    }
                }
                if (metrics & kMad) {
                    const std::size_t k = grid_index(p_grid, 0.5);
                    std::vector<double> devs(cell.quantiles.size());
                    for (std::size_t r = 0; r < cell.quantiles.size(); ++r)
                        devs[r] = std::abs(cell.quantiles[r][k] - theta0);
                    double mean_dev = 0;
                    for (double v : devs) mean_dev += v;
                    mean_dev /= devs.size();
                    CoverageRow row = base_row("mad", 0.5);
                    row.value = mean_dev;
                    row.mc_se = sample_se(devs, mean_dev);
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

std::vector<CoverageRow> run_one_sided(const SimConfig& config) {
    return run_simulation(config, kOneSided);
}
std::vector<CoverageRow> run_two_sided(const SimConfig& config) {
    return run_simulation(config, kTwoSided);
}
std::vector<CoverageRow> run_mad(const SimConfig& config) {
    return run_simulation(config, kMad);
}

ExactnessResult exactness_suite(int reps, std::uint64_t seed, int jobs,
                                const std::vector<int>& ns) {
    struct Combo {
        const char* model_id;
        const char* method;
        double theta0;
    };
    static const Combo combos[] = {
        {"gamma-shape", "invcdf:invx", 2.0},
        {"location-normal", "simple", 0.0},
        {"scale-exponential", "simple", 1.0},
        {"uniform-location", "simple", 1.0},
    };
    const std::vector<double> alphas{0.025, 0.05, 0.5, 0.95, 0.975};

    ExactnessResult result;
    result.pass = true;
    for (const Combo& combo : combos) {
        SimConfig cfg;
        cfg.model = ModelSpec::from_id(combo.model_id);
        cfg.theta0s = {combo.theta0};
        cfg.ns = ns;
        cfg.methods = {combo.method};
        cfg.alphas = alphas;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.jobs = jobs;
        for (CoverageRow& row : run_simulation(cfg, kOneSided)) {
            ExactnessCell cell;
            cell.nominal = row.alpha;
            cell.tolerance = 4.0 * std::sqrt(row.alpha * (1.0 - row.alpha) / reps);
            cell.pass = std::abs(row.value - cell.nominal) <= cell.tolerance;
            cell.row = std::move(row);
            result.pass = result.pass && cell.pass;
            result.cells.push_back(std::move(cell));
        }
    }
    result.cells_checked = static_cast<int>(result.cells.size());
    return result;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header_comments,
               const std::vector<CoverageRow>& rows) {
    for (const auto& line : header_comments) os << "# " << line << "\n";
    os << "model,method,theta0,n,metric,alpha,value,mc_se,reps,seed,failures\n";
    for (const auto& r : rows) {
        os << r.model_id << ',' << r.method << ',' << format_double(r.theta0) << ','
           << r.n << ',' << r.metric << ',' << format_double(r.alpha) << ','
           << format_double(r.value) << ',' << format_double(r.mc_se) << ',' << r.reps
           << ',' << r.seed << ',' << r.failures << "\n";
    }
}

} // namespace gfd
