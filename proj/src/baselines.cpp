#include "shapecov/baselines.hpp"

#include <cmath>
#include <limits>

namespace shapecov {

const HermitianMatrix& EstimateReport::theta() const {
    if (!theta_hat) {
        throw std::runtime_error("EstimateReport: estimate '" + method + "' does not exist");
    }
    return *theta_hat;
}

EstimateReport sample_covariance(const SampleSet& samples, std::optional<double> trace_target) {
    if (samples.n < 1) throw std::invalid_argument("sample_covariance: need n >= 1");
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(samples.p, samples.p);
    for (int i = 0; i < samples.n; ++i) {
        acc.noalias() += samples.samples.col(i) * samples.samples.col(i).adjoint();
    }
    HermitianMatrix sc(acc / static_cast<double>(samples.n));
    EstimateReport report;
    report.method = "sc";
    report.iterations = 0;
    report.residual = 0.0;
    report.theta_hat = trace_target ? sc.with_trace(*trace_target) : sc;
    return report;
}

namespace {

// (p/n) sum x_i x_i^H / (x_i^H Theta^-1 x_i); nullopt when a quadratic
// form collapses or Theta loses positive definiteness.
std::optional<HermitianMatrix> tyler_map(const HermitianMatrix& theta, const SampleSet& s) {
    Eigen::LLT<Eigen::MatrixXcd> llt(theta.mat());
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(s.p, s.p);
    for (int i = 0; i < s.n; ++i) {
        const double q = s.samples.col(i).dot(llt.solve(s.samples.col(i))).real();
        if (!(q > 1e-14)) return std::nullopt;
        acc.noalias() += (s.samples.col(i) * s.samples.col(i).adjoint()) / q;
    }
    return HermitianMatrix(acc * (static_cast<double>(s.p) / s.n));
}

}  // namespace

EstimateReport tyler(const SampleSet& samples, const TylerOptions& opts) {
    const int p = samples.p;
    const int n = samples.n;
    EstimateReport report;
    report.method = "tyler";
    if (n <= p) {
        report.existed = false;
        report.note = "n <= p: fixed point does not exist in general";
        return report;
    }
    // cheap general-position proxy: the samples must span C^p
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(samples.samples);
    if (qr.rank() < p) {
        report.note = "samples do not span C^p; fixed point may not exist";
    }

    HermitianMatrix theta = opts.init ? opts.init->with_trace(p) : HermitianMatrix::identity(p);
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        std::optional<HermitianMatrix> next = tyler_map(theta, samples);
        if (!next) {
            report.existed = false;
            report.iterations = it;
            report.note = "singular quadratic form at iterate; nonexistence signal";
            return report;
        }
        HermitianMatrix normalized = next->with_trace(p);
        const double rel = (normalized.mat() - theta.mat()).norm() / theta.mat().norm();
        theta = normalized;
        if (rel < opts.tol) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        report.existed = false;
        report.iterations = it;
        report.note = "no convergence within iteration cap; nonexistence signal";
        return report;
    }
    std::optional<HermitianMatrix> fixed = tyler_map(theta, samples);
    report.theta_hat = theta;
    report.iterations = it;
    report.residual = fixed ? (theta.mat() - fixed->mat()).norm()
                            : std::numeric_limits<double>::quiet_NaN();
    report.existed = true;
    return report;
}

EstimateReport projection_estimator(const SampleSet& samples, const AffineStructure& structure) {
    if (!structure.scale_fixed()) {
        throw std::invalid_argument("projection_estimator: structure must be scale-fixed");
    }
    const double target = structure.trace_target();
    EstimateReport ty = tyler(samples);
    HermitianMatrix base = HermitianMatrix::identity(samples.p);
    EstimateReport report;
    if (ty.existed) {
        base = ty.theta().with_trace(target);
        report.method = "proj(tyler)";
    } else {
        base = sample_covariance(samples, target).theta();
        report.method = "proj(sc)";
        report.note = ty.note;
    }
    ProjectionDiagnostics diag;
    HermitianMatrix proj = structure_project(structure, base, &diag);
    report.theta_hat = proj.with_trace(target);
    report.coefficients = structure.affine_coeffs(proj);
    report.iterations = diag.sweeps;
    report.residual = diag.affine_residual;
    return report;
}

}  // namespace shapecov
