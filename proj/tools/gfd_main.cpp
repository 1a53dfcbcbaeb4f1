// gfd: generalized fiducial distributions for one-parameter models.
//
// Subcommands: simulate, delta, contour, exactness, density-dump.
// Exit codes: 0 success, 2 usage error, 3 numeric/experiment error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfd/expansion.hpp"
#include "gfd/fiducial.hpp"
#include "gfd/matching.hpp"
#include "gfd/simharness.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw gfd::InputError("empty numeric list");
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw gfd::InputError("empty integer list");
    return out;
}

struct Range {
    double lo = 0, hi = 0;
    int steps = 0;
};

Range parse_range(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw gfd::InputError("range must be formatted a:b:steps");
    Range r{std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2])};
    if (r.steps < 1 || !(r.lo <= r.hi)) throw gfd::InputError("malformed range " + s);
    return r;
}

std::vector<double> linspace(const Range& r) {
    std::vector<double> out(r.steps);
    for (int i = 0; i < r.steps; ++i)
        out[i] = r.steps == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.steps - 1.0);
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + gfd::format_double(v[i]);
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Writes to the named file, or stdout when path is "-".
void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw gfd::InputError("cannot open output file: " + path);
    os << text;
}

gfd::Sample parse_sample(const std::string& data, bool bivariate) {
    if (!bivariate) return gfd::Sample::scalar(parse_doubles(data));
    std::vector<double> xs, ys;
    for (const auto& tok : split(data, ',')) {
        const auto pair = split(tok, ':');
        if (pair.size() != 2)
            throw gfd::InputError("bivariate observations must be formatted x:y");
        xs.push_back(std::stod(pair[0]));
        ys.push_back(std::stod(pair[1]));
    }
    return gfd::Sample::pairs(std::move(xs), std::move(ys));
}

// ----------------------------------------------------------------------------
// simulate
// ----------------------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    double q = 1.0;
    std::string theta0;
    std::string n;
    std::string methods = "FS,F1,BJ";
    std::string alphas = "0.025,0.05,0.5,0.95,0.975";
    std::string levels = "0.9,0.95";
    int reps = 5000;
    std::uint64_t seed = 0;
    std::string out = "-";
    int jobs = 0;
    std::string config_path;
};

void apply_json_config(SimulateArgs& a, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw gfd::InputError("cannot read config file: " + path);
    ordered_json j = ordered_json::parse(is);
    auto list_or_string = [](const ordered_json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ",";
            s += e.is_string() ? e.get<std::string>() : e.dump();
        }
        return s;
    };
    if (j.contains("model")) a.model = j["model"].get<std::string>();
    if (j.contains("q")) a.q = j["q"].get<double>();
    if (j.contains("theta0")) a.theta0 = list_or_string(j["theta0"]);
    if (j.contains("n")) a.n = list_or_string(j["n"]);
    if (j.contains("methods")) a.methods = list_or_string(j["methods"]);
    if (j.contains("alphas")) a.alphas = list_or_string(j["alphas"]);
    if (j.contains("levels")) a.levels = list_or_string(j["levels"]);
    if (j.contains("reps")) a.reps = j["reps"].get<int>();
    if (j.contains("seed")) a.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) a.out = j["out"].get<std::string>();
    if (j.contains("jobs")) a.jobs = j["jobs"].get<int>();
}

int cmd_simulate(const SimulateArgs& args) {
    gfd::SimConfig cfg;
    cfg.model = gfd::ModelSpec::from_id(args.model, args.q);
    cfg.theta0s = parse_doubles(args.theta0);
    cfg.ns = parse_ints(args.n);
    cfg.methods = split(args.methods, ',');
    cfg.alphas = parse_doubles(args.alphas);
    cfg.levels = parse_doubles(args.levels);
    cfg.reps = args.reps;
    cfg.seed = args.seed;
    cfg.jobs = resolve_jobs(args.jobs);
    for (const auto& m : cfg.methods) gfd::DgeSpec::from_method(m);  // validate early

    const auto rows = gfd::run_simulation(cfg);

    std::vector<std::string> header{
        "command=simulate",
        "model=" + cfg.model.id(),
        "q=" + gfd::format_double(cfg.model.q),
        "theta0=" + join_doubles(cfg.theta0s),
        "n=" + join_ints(cfg.ns),
        "methods=" + join_strings(cfg.methods),
        "alphas=" + join_doubles(cfg.alphas),
        "levels=" + join_doubles(cfg.levels),
        "reps=" + std::to_string(cfg.reps),
        "seed=" + std::to_string(cfg.seed),
    };
    std::ostringstream os;
    gfd::write_csv(os, header, rows);
    write_text(args.out, os.str());
    return kExitOk;
}

// ----------------------------------------------------------------------------
// delta
// ----------------------------------------------------------------------------

int cmd_delta(const std::string& model_id, double q, const std::string& dge_id,
              double theta0, double alpha, double a0, double a1) {
    const auto model = gfd::ModelSpec::from_id(model_id, q);
    const auto dge = gfd::DgeSpec::from_id(dge_id);
    const auto report = gfd::match_report(model, dge, theta0, a0, a1, alpha);
    ordered_json j{
        {"model", report.model_id},  {"dge", report.dge_id}, {"theta0", report.theta0},
        {"delta1", report.delta1},   {"delta2", report.delta2},
        {"order", gfd::to_string(report.order)},
    };
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------------------
// contour
// ----------------------------------------------------------------------------

int cmd_contour(const std::string& mu_range, const std::string& q_range,
                const std::string& out, int jobs) {
    const Range mu = parse_range(mu_range);
    const Range qr = parse_range(q_range);
    if (!(mu.lo > 0.0) || !(qr.lo > 0.0))
        throw gfd::InputError("contour ranges must be strictly positive");
    const auto mus = linspace(mu);
    const auto qs = linspace(qr);
    const auto pts = gfd::delta2_contour(mus, qs, resolve_jobs(jobs));
    std::ostringstream os;
    os << "# command=contour\n";
    os << "# mu-range=" << mu_range << "\n";
    os << "# q-range=" << q_range << "\n";
    gfd::write_contour_csv(os, pts);
    write_text(out, os.str());
    return kExitOk;
}

// ----------------------------------------------------------------------------
// exactness
// ----------------------------------------------------------------------------

int cmd_exactness(int reps, std::uint64_t seed, const std::string& out, int jobs) {
    const auto result = gfd::exactness_suite(reps, seed, resolve_jobs(jobs));

    std::vector<gfd::CoverageRow> rows;
    rows.reserve(result.cells.size());
    for (const auto& c : result.cells) rows.push_back(c.row);
    std::vector<std::string> header{
        "command=exactness",
        "reps=" + std::to_string(reps),
        "seed=" + std::to_string(seed),
    };
    std::ostringstream os;
    gfd::write_csv(os, header, rows);
    write_text(out, os.str());

    int failing = 0;
    for (const auto& c : result.cells) {
        if (!c.pass) {
            ++failing;
            std::cerr << "FAIL cell: " << c.row.model_id << " " << c.row.method
                      << " theta0=" << c.row.theta0 << " n=" << c.row.n
                      << " alpha=" << c.row.alpha << " coverage=" << c.row.value
                      << " nominal=" << c.nominal << " tol=" << c.tolerance << "\n";
        }
    }
    std::cout << "exactness: " << result.cells_checked
              << " cells checked (4 models x n-values x 5 alphas), " << failing
              << " failing -> " << (result.pass ? "PASS" : "FAIL") << "\n";
    return result.pass ? kExitOk : kExitNumeric;
}

// ----------------------------------------------------------------------------
// density-dump
// ----------------------------------------------------------------------------

int cmd_density_dump(const std::string& model_id, double q, const std::string& dge_id,
                     const std::string& data, double theta0, int n, std::uint64_t seed,
                     const std::string& out, int grid) {
    const auto model = gfd::ModelSpec::from_id(model_id, q);
    const auto dge = gfd::DgeSpec::from_id(dge_id);
    gfd::Sample sample = [&] {
        if (!data.empty()) return parse_sample(data, model.bivariate());
        if (n < 2) throw gfd::InputError("density-dump: provide --data or --theta0/--n");
        gfd::Stream stream(seed, 0, 0);
        return gfd::sample_data(model, theta0, n, stream);
    }();
    const auto density = gfd::FiducialDensity::build(model, dge, sample);
    std::ostringstream os;
    os << "# command=density-dump\n";
    os << "# model=" << model.id() << "\n";
    os << "# q=" << gfd::format_double(model.q) << "\n";
    os << "# dge=" << dge.id() << "\n";
    os << "# n=" << sample.n() << "\n";
    os << "# bracket=" << gfd::format_double(density.bracket_lo()) << ","
       << gfd::format_double(density.bracket_hi()) << "\n";
    if (density.edge_warning()) os << "# warning=density mass near a domain edge\n";
    density.dump_csv(os, grid);
    write_text(out, os.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized fiducial distributions for one-parameter models"};
    app.require_subcommand(1);

    // simulate
    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage/length/MAD study");
    simulate->add_option("--config", sim.config_path, "JSON config file (flags override)");
    simulate->add_option("--model", sim.model, "model id");
    simulate->add_option("--q", sim.q, "scaled-normal exponent");
    simulate->add_option("--theta0", sim.theta0, "true parameter(s), comma separated");
    simulate->add_option("--n", sim.n, "sample size(s), comma separated");
    simulate->add_option("--methods", sim.methods, "FS,F1,BJ,suffstat or DGE ids");
    simulate->add_option("--alphas", sim.alphas, "one-sided quantile levels");
    simulate->add_option("--levels", sim.levels, "two-sided confidence levels");
    simulate->add_option("--reps", sim.reps, "replications per cell");
    simulate->add_option("--seed", sim.seed, "base seed");
    simulate->add_option("--out", sim.out, "output CSV path ('-' = stdout)");
    simulate->add_option("--jobs", sim.jobs, "worker threads (0 = hardware)")
        ->envname("GFD_JOBS");

    // delta
    std::string d_model, d_dge = "matched";
    double d_q = 1.0, d_theta0 = 0.0, d_alpha = 0.05, d_a0 = 0.0, d_a1 = 0.0;
    auto* delta = app.add_subcommand("delta", "probability-matching diagnostics");
    delta->add_option("--model", d_model, "model id")->required();
    delta->add_option("--q", d_q, "scaled-normal exponent");
    delta->add_option("--dge", d_dge, "DGE id");
    delta->add_option("--theta0", d_theta0, "true parameter")->required();
    delta->add_option("--alpha", d_alpha, "alpha entering the a-term of Delta2");
    delta->add_option("--a0", d_a0, "a0(theta0) override");
    delta->add_option("--a1", d_a1, "a1(theta0) override");

    // contour
    std::string c_mu = "0.03:3:100", c_q = "0.03:3:100", c_out = "-";
    int c_jobs = 0;
    auto* contour = app.add_subcommand("contour", "scaled-normal Delta2 grid");
    contour->add_option("--mu-range", c_mu, "a:b:steps");
    contour->add_option("--q-range", c_q, "a:b:steps");
    contour->add_option("--out", c_out, "output CSV path ('-' = stdout)");
    contour->add_option("--jobs", c_jobs, "worker threads (0 = hardware)")
        ->envname("GFD_JOBS");

    // exactness
    int e_reps = 5000, e_jobs = 0;
    std::uint64_t e_seed = 0;
    std::string e_out = "-";
    auto* exactness = app.add_subcommand("exactness", "one-sided exactness suite");
    exactness->add_option("--reps", e_reps, "replications per cell");
    exactness->add_option("--seed", e_seed, "base seed");
    exactness->add_option("--out", e_out, "output CSV path ('-' = stdout)");
    exactness->add_option("--jobs", e_jobs, "worker threads (0 = hardware)")
        ->envname("GFD_JOBS");

    // density-dump
    std::string dd_model, dd_dge = "simple", dd_data, dd_out = "-";
    double dd_q = 1.0, dd_theta0 = 0.0;
    int dd_n = 0, dd_grid = 1024;
    std::uint64_t dd_seed = 0;
    auto* dump = app.add_subcommand("density-dump", "CSV theta,pdf,cdf over the bracket");
    dump->add_option("--model", dd_model, "model id")->required();
    dump->add_option("--q", dd_q, "scaled-normal exponent");
    dump->add_option("--dge", dd_dge, "DGE id");
    dump->add_option("--data", dd_data, "observations v1,v2,... (pairs as x:y)");
    dump->add_option("--theta0", dd_theta0, "draw a sample at this parameter");
    dump->add_option("--n", dd_n, "sample size for the drawn sample");
    dump->add_option("--seed", dd_seed, "seed for the drawn sample");
    dump->add_option("--out", dd_out, "output CSV path ('-' = stdout)");
    dump->add_option("--grid", dd_grid, "grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            if (!sim.config_path.empty()) {
                // JSON provides defaults; explicit flags take precedence
                SimulateArgs merged;
                apply_json_config(merged, sim.config_path);
                if (simulate->count("--model")) merged.model = sim.model;
                if (simulate->count("--q")) merged.q = sim.q;
                if (simulate->count("--theta0")) merged.theta0 = sim.theta0;
                if (simulate->count("--n")) merged.n = sim.n;
                if (simulate->count("--methods")) merged.methods = sim.methods;
                if (simulate->count("--alphas")) merged.alphas = sim.alphas;
                if (simulate->count("--levels")) merged.levels = sim.levels;
                if (simulate->count("--reps")) merged.reps = sim.reps;
                if (simulate->count("--seed")) merged.seed = sim.seed;
                if (simulate->count("--out")) merged.out = sim.out;
                if (simulate->count("--jobs")) merged.jobs = sim.jobs;
                sim = merged;
            }
            if (sim.model.empty() || sim.theta0.empty() || sim.n.empty())
                throw gfd::InputError("simulate: --model, --theta0 and --n are required");
            return cmd_simulate(sim);
        }
        if (delta->parsed()) return cmd_delta(d_model, d_q, d_dge, d_theta0, d_alpha, d_a0, d_a1);
        if (contour->parsed()) return cmd_contour(c_mu, c_q, c_out, c_jobs);
        if (exactness->parsed()) return cmd_exactness(e_reps, e_seed, e_out, e_jobs);
        if (dump->parsed())
            return cmd_density_dump(dd_model, dd_q, dd_dge, dd_data, dd_theta0, dd_n,
                                    dd_seed, dd_out, dd_grid);
    } catch (const gfd::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gfd::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
