#include "shapecov/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "shapecov/csv.hpp"
#include "shapecov/matrix_io.hpp"

namespace shapecov {

Scenario scenario_from_string(const std::string& s) {
    if (s == "toeplitz") return Scenario::toeplitz;
    if (s == "banded") return Scenario::banded;
    if (s == "doa") return Scenario::doa;
    if (s == "custom") return Scenario::custom;
    throw ConfigError("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::toeplitz: return "toeplitz";
        case Scenario::banded: return "banded";
        case Scenario::doa: return "doa";
        case Scenario::custom: return "custom";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& s) {
    if (s == "sc") return EstimatorKind::sc;
    if (s == "tyler") return EstimatorKind::tyler;
    if (s == "proj") return EstimatorKind::proj;
    if (s == "coca") return EstimatorKind::coca;
    throw ConfigError("unknown estimator '" + s + "' (expected sc|tyler|proj|coca)");
}

std::string to_string(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::sc: return "sc";
        case EstimatorKind::tyler: return "tyler";
        case EstimatorKind::proj: return "proj";
        case EstimatorKind::coca: return "coca";
    }
    return "?";
}

std::vector<int> ExperimentConfig::effective_n_grid() const {
    if (!n_grid.empty()) return n_grid;
    // geometric sweep from p to 30p, six points
    std::vector<int> grid;
    for (int k = 0; k <= 5; ++k) {
        const int n = static_cast<int>(std::lround(p * std::pow(30.0, k / 5.0)));
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

bool operator==(const BenchRow& a, const BenchRow& b) {
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.estimator == b.estimator && a.n == b.n && same(a.mse, b.mse) &&
           same(a.stderr_mean, b.stderr_mean) && a.trials == b.trials &&
           a.failures == b.failures && same(a.crb, b.crb);
}

std::pair<HermitianMatrix, AffineStructure> builtin_theta0(Scenario scenario, int p,
                                                           const ScenarioParams& params) {
    if (p < 1) throw ConfigError("builtin_theta0: p must be >= 1");
    switch (scenario) {
        case Scenario::toeplitz: {
            Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(p, p);
            const Complex sub1(0.2, 0.2);
            const Complex sub2(0.04, 0.04);
            for (int i = 0; i + 1 < p; ++i) {
                t(i, i + 1) = sub1;
                t(i + 1, i) = std::conj(sub1);
            }
            for (int i = 0; i + 2 < p; ++i) {
                t(i, i + 2) = sub2;
                t(i + 2, i) = std::conj(sub2);
            }
            HermitianMatrix theta0(t);
            AffineStructure structure = scale_fix(toeplitz_structure(p), static_cast<double>(p));
            if (!(hermitian_eig(theta0).values.minCoeff() > 0)) {
                throw ConfigError("builtin_theta0: toeplitz matrix is not positive definite");
            }
            if (structure.membership_residual(theta0) > 1e-8) {
                throw ConfigError("builtin_theta0: toeplitz matrix is not in the structure set");
            }
            return {theta0, structure};
        }
        case Scenario::banded: {
            const int b = params.band;
            if (b < 0 || b > p - 1) throw ConfigError("builtin_theta0: band out of range");
            Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(p, p);
            for (int i = 0; i < p; ++i) t(i, i) = 20.0 * (i + 1);
            const Complex c1(12.0, 3.0);
            const Complex c2(2.0, 2.0);
            if (b >= 1) {
                for (int m = 1; m < p; ++m) {
                    t(m - 1, m) = c1 * static_cast<double>(m);
                    t(m, m - 1) = std::conj(t(m - 1, m));
                }
            }
            if (b >= 2) {
                for (int m = 1; m < p - 1; ++m) {
                    t(m - 1, m + 1) = c2 * static_cast<double>(m);
                    t(m + 1, m - 1) = std::conj(t(m - 1, m + 1));
                }
            }
            HermitianMatrix theta0 = HermitianMatrix(t).with_trace(static_cast<double>(p));
            if (!(hermitian_eig(theta0).values.minCoeff() > 0)) {
                throw ConfigError("builtin_theta0: banded matrix is not positive definite");
            }
            AffineStructure structure = scale_fix(banded_structure(p, b), static_cast<double>(p));
            if (structure.membership_residual(theta0) > 1e-8) {
                throw ConfigError("builtin_theta0: banded matrix is not in the structure set");
            }
            return {theta0, structure};
        }
        case Scenario::doa: {
            const int grid_n = params.grid_n > 0 ? params.grid_n : p;
            DoaGrid grid{p, uniform_angle_grid(grid_n, params.theta_low, params.theta_high),
                         params.sigma2};
            if (params.sources < 1 || params.sources > grid_n) {
                throw ConfigError("builtin_theta0: source count out of range");
            }
            Eigen::MatrixXcd t = params.sigma2 * Eigen::MatrixXcd::Identity(p, p);
            for (int s = 0; s < params.sources; ++s) {
                // unit-power sources spread uniformly over the grid
                const int idx = (s * grid_n) / params.sources;
                const Eigen::VectorXcd bv = steering_vector(p, grid.angles[idx]);
                t += bv * bv.adjoint();
            }
            const double target = params.sigma2 * p;
            HermitianMatrix theta0 = HermitianMatrix(t).with_trace(target);
            if (!(hermitian_eig(theta0).values.minCoeff() > 0)) {
                throw ConfigError("builtin_theta0: doa matrix is not positive definite");
            }
            AffineStructure structure = scale_fix(doa_structure(grid), target);
            if (structure.membership_residual(theta0) > 1e-8 * target) {
                throw ConfigError("builtin_theta0: doa matrix is not in the structure set");
            }
            return {theta0, structure};
        }
        case Scenario::custom:
            break;
    }
    throw ConfigError("builtin_theta0: custom scenario has no builtin matrix");
}

namespace {

struct TrialResult {
    // squared Frobenius error per estimator, NaN when unavailable
    std::vector<double> sqerr;
    std::vector<bool> failed;   // estimator did not produce an estimate
    bool aborted = false;       // hard numerical error, trial dropped
    std::string abort_reason;
};

TrialResult run_trial(const ExperimentConfig& cfg, const HermitianMatrix& theta0,
                      const AffineStructure& structure, int n, std::uint64_t trial_uid) {
    const std::size_t m = cfg.estimators.size();
    TrialResult out;
    out.sqerr.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.failed.assign(m, false);
    const double target = structure.trace_target();
    try {
        const SampleSet samples =
            normalize_to_cae(sample_compound_gaussian(theta0, n, cfg.texture, cfg.seed, trial_uid));
        std::optional<EstimateReport> tyler_report;
        for (std::size_t e = 0; e < m; ++e) {
            EstimateReport report;
            switch (cfg.estimators[e]) {
                case EstimatorKind::sc:
                    report = sample_covariance(samples, target);
                    break;
                case EstimatorKind::tyler:
                    report = tyler(samples);
                    tyler_report = report;
                    break;
                case EstimatorKind::proj:
                    report = projection_estimator(samples, structure);
                    break;
                case EstimatorKind::coca: {
                    CocaProblem prob{samples, structure, cfg.norm_kind, cfg.d_floor};
                    report = coca_solve(prob, cfg.solver);
                    break;
                }
            }
            if (!report.existed || !report.theta_hat) {
                out.failed[e] = true;
                continue;
            }
            const HermitianMatrix gauged = report.theta().with_trace(target);
            out.sqerr[e] = (gauged.mat() - theta0.mat()).squaredNorm();
        }
    } catch (const std::exception& ex) {
        out.aborted = true;
        out.abort_reason = ex.what();
    }
    return out;
}

AffineStructure make_custom_structure(const ExperimentConfig& cfg) {
    const std::string& name = cfg.custom_structure;
    const int p = cfg.p;
    if (name == "doa") {
        const int grid_n = cfg.params.grid_n > 0 ? cfg.params.grid_n : p;
        DoaGrid grid{p, uniform_angle_grid(grid_n, cfg.params.theta_low, cfg.params.theta_high),
                     cfg.params.sigma2};
        return scale_fix(doa_structure(grid), cfg.params.sigma2 * p);
    }
    const double target = cfg.trace_target > 0 ? cfg.trace_target : static_cast<double>(p);
    if (name == "toeplitz") return scale_fix(toeplitz_structure(p), target);
    if (name == "banded") return scale_fix(banded_structure(p, cfg.params.band), target);
    if (name == "full" || name.empty()) return full_structure(p, target);
    throw ConfigError("unknown custom structure '" + name +
                      "' (expected toeplitz|banded|doa|full)");
}

}  // namespace

std::pair<HermitianMatrix, AffineStructure> resolve_scenario(const ExperimentConfig& cfg) {
    if (cfg.scenario != Scenario::custom) {
        return builtin_theta0(cfg.scenario, cfg.p, cfg.params);
    }
    AffineStructure structure = make_custom_structure(cfg);
    const double target = structure.trace_target();
    HermitianMatrix theta0 = HermitianMatrix::identity(cfg.p).with_trace(target);
    if (cfg.theta0_source.empty() || cfg.theta0_source == "identity") {
        // scaled identity, a member of every supported family
    } else {
        try {
            theta0 = read_matrix_csv_file(cfg.theta0_source).with_trace(target);
        } catch (const std::exception& ex) {
            throw ConfigError("custom theta0 '" + cfg.theta0_source + "': " + ex.what());
        }
    }
    if (theta0.dim() != cfg.p) throw ConfigError("custom theta0 dimension does not match p");
    if (!(hermitian_eig(theta0).values.minCoeff() > 0)) {
        throw ConfigError("custom theta0 is not positive definite");
    }
    if (structure.membership_residual(theta0) > 1e-8 * std::max(1.0, target)) {
        throw ConfigError("custom theta0 is not a member of the structure set");
    }
    return {theta0, structure};
}

BenchTable run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw ConfigError("run_experiment: trials must be >= 1");
    const std::vector<int> n_grid = cfg.effective_n_grid();
    if (n_grid.empty()) throw ConfigError("run_experiment: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i) {
        if (n_grid[i] <= n_grid[i - 1]) throw ConfigError("run_experiment: n_grid must ascend");
    }

    auto [theta0, structure] = resolve_scenario(cfg);

    CrbReport crb = fim(structure, theta0);

    const std::size_t n_count = n_grid.size();
    const std::size_t per_n = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialResult> results(cfg.estimators.empty() ? 0 : n_count * per_n);

    std::atomic<std::size_t> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_threads =
        cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, hw);
    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= results.size()) return;
            const std::size_t ni = job / per_n;
            const std::size_t t = job % per_n;
            const std::uint64_t trial_uid = static_cast<std::uint64_t>(ni) * per_n + t;
            results[job] = run_trial(cfg, theta0, structure, n_grid[ni], trial_uid);
        }
    };
    if (!results.empty()) {
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
            for (std::thread& th : pool) th.join();
        }
    }

    // fixed reduction order keyed by (estimator, n, trial)
    BenchTable table;
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        for (std::size_t ni = 0; ni < n_count; ++ni) {
            long aborted = 0;
            long failures = 0;
            std::vector<double> errs;
            errs.reserve(per_n);
            for (std::size_t t = 0; t < per_n; ++t) {
                const TrialResult& r = results[ni * per_n + t];
                if (r.aborted) {
                    ++aborted;
                    continue;
                }
                if (r.failed[e]) {
                    ++failures;
                    continue;
                }
                errs.push_back(r.sqerr[e]);
            }
            if (aborted * 20 > cfg.trials) {
                const TrialResult* sample_abort = nullptr;
                for (std::size_t t = 0; t < per_n; ++t) {
                    if (results[ni * per_n + t].aborted) {
                        sample_abort = &results[ni * per_n + t];
                        break;
                    }
                }
                throw FailureBudgetError(
                    "run_experiment: more than 5% of trials aborted at n = " +
                    std::to_string(n_grid[ni]) +
                    (sample_abort ? " (first: " + sample_abort->abort_reason + ")" : ""));
            }
            BenchRow row;
            row.estimator = to_string(cfg.estimators[e]);
            row.n = n_grid[ni];
            row.trials = static_cast<long>(errs.size());
            row.failures = failures;
            row.crb = mse_bound(crb, n_grid[ni]);
            if (!errs.empty()) {
                double mean = 0.0;
                for (double v : errs) mean += v;
                mean /= static_cast<double>(errs.size());
                double var = 0.0;
                for (double v : errs) var += (v - mean) * (v - mean);
                var = errs.size() > 1 ? var / static_cast<double>(errs.size() - 1) : 0.0;
                row.mse = mean;
                row.stderr_mean = std::sqrt(var / static_cast<double>(errs.size()));
            } else {
                row.mse = std::numeric_limits<double>::quiet_NaN();
                row.stderr_mean = std::numeric_limits<double>::quiet_NaN();
            }
            table.rows.push_back(std::move(row));
        }
    }
    if (cfg.estimators.empty()) {
        for (std::size_t ni = 0; ni < n_count; ++ni) {
            BenchRow row;
            row.estimator = "crb";
            row.n = n_grid[ni];
            row.mse = std::numeric_limits<double>::quiet_NaN();
            row.stderr_mean = std::numeric_limits<double>::quiet_NaN();
            row.trials = 0;
            row.failures = 0;
            row.crb = mse_bound(crb, n_grid[ni]);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

void write_results_csv(const BenchTable& table, std::ostream& out) {
    out << "estimator,n,mse,stderr,trials,failures,crb\n";
    for (const BenchRow& r : table.rows) {
        out << r.estimator << "," << r.n << "," << csv::format_double(r.mse) << ","
            << csv::format_double(r.stderr_mean) << "," << r.trials << "," << r.failures << ","
            << csv::format_double(r.crb) << "\n";
    }
}

BenchTable read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "estimator,n,mse,stderr,trials,failures,crb") {
        throw std::runtime_error("read_results_csv: bad header");
    }
    BenchTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = csv::split_fields(line);
        if (f.size() != 7) throw std::runtime_error("read_results_csv: bad row: " + line);
        BenchRow r;
        r.estimator = f[0];
        r.n = std::stoi(f[1]);
        r.mse = csv::parse_double(f[2]);
        r.stderr_mean = csv::parse_double(f[3]);
        r.trials = std::stol(f[4]);
        r.failures = std::stol(f[5]);
        r.crb = csv::parse_double(f[6]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

void emit_results(const BenchTable& table, const std::string& path_prefix) {
    {
        std::ofstream out(path_prefix + "_mse.csv");
        if (!out) throw std::runtime_error("cannot open " + path_prefix + "_mse.csv");
        write_results_csv(table, out);
    }
    std::ofstream gp(path_prefix + "_plot.gp");
    if (!gp) throw std::runtime_error("cannot open " + path_prefix + "_plot.gp");
    std::vector<std::string> names;
    for (const BenchRow& r : table.rows) {
        if (std::find(names.begin(), names.end(), r.estimator) == names.end()) {
            names.push_back(r.estimator);
        }
    }
    gp << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'n'\n"
       << "set ylabel 'MSE'\n"
       << "set key outside\n"
       << "plot ";
    bool first = true;
    for (const std::string& name : names) {
        if (!first) gp << ", \\\n     ";
        gp << "'" << path_prefix << "_mse.csv' using 2:(strcol(1) eq '" << name
           << "' ? $3 : 1/0) with linespoints title '" << name << "'";
        first = false;
    }
    if (!names.empty()) {
        gp << ", \\\n     '" << path_prefix << "_mse.csv' using 2:(strcol(1) eq '"
           << names.front() << "' ? $7 : 1/0) with lines dashtype 2 title 'CRB'";
    }
    gp << "\n";
}

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (const std::string& f : csv::split_fields(s)) {
        const std::string t = trim(f);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    bool texture_is_chi = true;
    double texture_df = 3.0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "scenario") cfg.scenario = scenario_from_string(value);
            else if (key == "p") cfg.p = std::stoi(value);
            else if (key == "n_grid") {
                cfg.n_grid.clear();
                for (const std::string& v : split_list(value)) cfg.n_grid.push_back(std::stoi(v));
            } else if (key == "trials") cfg.trials = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "estimators") {
                cfg.estimators.clear();
                for (const std::string& v : split_list(value)) {
                    cfg.estimators.push_back(estimator_from_string(v));
                }
            } else if (key == "norm") cfg.norm_kind = norm_kind_from_string(value);
            else if (key == "texture") {
                if (value == "chi_square") texture_is_chi = true;
                else if (value == "constant") texture_is_chi = false;
                else throw ConfigError("unknown texture '" + value + "'");
            } else if (key == "texture_df") texture_df = csv::parse_double(value);
            else if (key == "band") cfg.params.band = std::stoi(value);
            else if (key == "grid_n") cfg.params.grid_n = std::stoi(value);
            else if (key == "theta_low") cfg.params.theta_low = csv::parse_double(value);
            else if (key == "theta_high") cfg.params.theta_high = csv::parse_double(value);
            else if (key == "sigma2") cfg.params.sigma2 = csv::parse_double(value);
            else if (key == "sources") cfg.params.sources = std::stoi(value);
            else if (key == "trace_target") cfg.trace_target = csv::parse_double(value);
            else if (key == "theta0") cfg.theta0_source = value;
            else if (key == "structure") cfg.custom_structure = value;
            else if (key == "tol_abs") cfg.solver.tol_abs = csv::parse_double(value);
            else if (key == "tol_rel") cfg.solver.tol_rel = csv::parse_double(value);
            else if (key == "max_iter") cfg.solver.max_iter = std::stoi(value);
            else if (key == "d_floor") cfg.d_floor = csv::parse_double(value);
            else if (key == "threads") cfg.threads = std::stoi(value);
            else if (key == "out_prefix") cfg.out_prefix = value;
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ConfigError("config line " + std::to_string(lineno) + " (" + key +
                              "): " + ex.what());
        }
    }
    cfg.texture = texture_is_chi ? TextureLaw::chi_square(texture_df) : TextureLaw::constant();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace shapecov
