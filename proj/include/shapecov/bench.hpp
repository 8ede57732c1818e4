#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "shapecov/coca.hpp"
#include "shapecov/crb.hpp"

namespace shapecov {

enum class Scenario { toeplitz, banded, doa, custom };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

enum class EstimatorKind { sc, tyler, proj, coca };

EstimatorKind estimator_from_string(const std::string& s);
std::string to_string(EstimatorKind e);

/// Thrown on malformed configs, unknown keys, or scenario matrices that
/// fail their own preconditions (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when more than the tolerated fraction of trials abort with a
/// hard numerical error (CLI exit code 3).
class FailureBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioParams {
    int band = 2;
    int grid_n = 0;  // 0: defaults to p
    double theta_low = 0.0;
    double theta_high = 3.14159265358979323846;
    double sigma2 = 0.01;
    int sources = 5;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::toeplitz;
    int p = 10;
    std::vector<int> n_grid;  // empty: geometric from p to 30p
    int trials = 200;
    std::uint64_t seed = 1;
    std::vector<EstimatorKind> estimators = {EstimatorKind::sc, EstimatorKind::tyler,
                                             EstimatorKind::proj, EstimatorKind::coca};
    NormKind norm_kind = NormKind::frobenius;
    TextureLaw texture = TextureLaw::chi_square(3.0);
    ScenarioParams params;
    std::string theta0_source;     // custom scenario: "identity" or file path
    std::string custom_structure;  // custom scenario: toeplitz|banded|doa|full
    double trace_target = 0.0;     // 0: scenario default
    CocaOptions solver;
    double d_floor = 0.0;
    int threads = 0;  // 0: hardware concurrency
    std::string out_prefix = "bench";

    std::vector<int> effective_n_grid() const;
};

struct BenchRow {
    std::string estimator;
    int n = 0;
    double mse = 0.0;
    double stderr_mean = 0.0;
    long trials = 0;
    long failures = 0;
    double crb = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;

    bool operator==(const BenchTable&) const = default;
};

bool operator==(const BenchRow& a, const BenchRow& b);

/// The paper's experiment matrices and matching scale-fixed structures:
///   toeplitz: unit diagonal, (1/5)(1+j) and (1/25)(1+j) sub-diagonals;
///   banded:   diagonal 20,40,...,20p with (12+3j)m and (2+2j)m bands,
///             scaled to trace p, band width params.band;
///   doa:      `sources` unit-power steering terms on the grid plus
///             sigma^2 I, scaled to the structure trace sigma^2 p.
/// Positive-definiteness and structure membership are asserted.
std::pair<HermitianMatrix, AffineStructure> builtin_theta0(Scenario scenario, int p,
                                                           const ScenarioParams& params = {});

/// Scenario matrix and structure for any config, including custom ones
/// (theta0 from "identity" or a matrix CSV, structure from the named
/// family).
std::pair<HermitianMatrix, AffineStructure> resolve_scenario(const ExperimentConfig& config);

/// Seeded Monte Carlo sweep over n_grid: per trial, draw compound-
/// Gaussian samples, normalize to the sphere, run every enabled
/// estimator, rescale each output to the common trace gauge and record
/// squared Frobenius errors. Deterministic for a fixed config regardless
/// of thread count. Tyler nonexistence counts as a failure for that row
/// (the projection estimator falls back to its sample-covariance branch);
/// hard errors abort a trial, and more than 5% aborted trials at any n
/// raise FailureBudgetError.
BenchTable run_experiment(const ExperimentConfig& config);

/// Writes <prefix>_mse.csv (estimator,n,mse,stderr,trials,failures,crb)
/// and a best-effort gnuplot script <prefix>_plot.gp.
void emit_results(const BenchTable& table, const std::string& path_prefix);

void write_results_csv(const BenchTable& table, std::ostream& out);
BenchTable read_results_csv(std::istream& in);

/// Plain-text "key = value" config; '#' starts a comment. Unknown keys
/// are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace shapecov
