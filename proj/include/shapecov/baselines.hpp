#pragma once

#include <optional>
#include <string>

#include "shapecov/sampling.hpp"
#include "shapecov/structures.hpp"

namespace shapecov {

/// Common estimator output. Nonexistence (Tyler with too few samples) is
/// a value, not an error: existed == false and theta_hat is empty.
struct EstimateReport {
    std::optional<HermitianMatrix> theta_hat;
    std::optional<Eigen::VectorXd> coefficients;
    std::string method;
    int iterations = 0;
    double residual = 0.0;
    std::optional<double> objective;
    bool existed = true;
    std::string note;

    const HermitianMatrix& theta() const;
};

/// (1/n) sum x_i x_i^H, optionally trace-rescaled when a common gauge is
/// requested for comparison against other estimators.
EstimateReport sample_covariance(const SampleSet& samples,
                                 std::optional<double> trace_target = std::nullopt);

struct TylerOptions {
    double tol = 1e-12;
    int max_iter = 1000;
    std::optional<HermitianMatrix> init;  // default: identity
};

/// Tyler's fixed-point iteration, trace-normalized to p each step.
/// existed == false when n <= p, when a quadratic form collapses, or when
/// the iteration fails to converge within the cap.
EstimateReport tyler(const SampleSet& samples, const TylerOptions& opts = {});

/// Two-step estimator: project Tyler's estimate onto the structure set
/// when it exists, the trace-rescaled sample covariance otherwise. The
/// method tag records which branch ran.
EstimateReport projection_estimator(const SampleSet& samples, const AffineStructure& structure);

}  // namespace shapecov
