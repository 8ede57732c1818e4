#pragma once

#include <iosfwd>
#include <vector>

#include "shapecov/baselines.hpp"

namespace shapecov {

/// Data of the relaxed covariance-matching program:
///   minimize    || Theta(a) - (1/n) sum_i d_i x_i x_i^H ||_norm
///   subject to  Theta(a) - (d_i/p) x_i x_i^H >= 0   for all i,
///               Theta(a) >= 0,  d_i >= d_floor,
///               a >= 0 when the structure demands it.
/// d_floor realizes the strict constraint d_i > 0; samples are unit-norm
/// so the natural scale of d_i is O(p).
struct CocaProblem {
    SampleSet samples;
    AffineStructure structure;  // scale-fixed
    NormKind norm_kind = NormKind::frobenius;
    double d_floor = 0.0;  // <= 0 selects the default 1e-8 * p

    double effective_d_floor() const;
};

struct CocaOptions {
    double tol_abs = 1e-7;
    double tol_rel = 1e-6;
    int max_iter = 20000;
    double rho = 1.0;
    double over_relax = 1.7;  // in [1, 2); 1 disables over-relaxation
    bool warm_start = true;
    std::ostream* diagnostics = nullptr;  // CSV: iteration,primal_res,dual_res,objective
    int diagnostics_every = 25;
};

/// Thrown when the splitting iteration hits the cap; carries the residual
/// history (every 100th iteration).
class CocaConvergenceError : public std::runtime_error {
public:
    CocaConvergenceError(const std::string& what, std::vector<double> primal,
                         std::vector<double> dual)
        : std::runtime_error(what), primal_history(std::move(primal)),
          dual_history(std::move(dual)) {}
    std::vector<double> primal_history;
    std::vector<double> dual_history;
};

/// Thrown when the iterates diverge, the signature of an empty or
/// near-empty structure set.
class CocaInfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// True iff Theta - (d/p) x x^H >= -1e-10 I; agrees with the scalar test
/// d <= p / (x^H Theta^-1 x) within that tolerance. Theta must be
/// strictly positive definite.
bool schur_check(const HermitianMatrix& theta, const Eigen::VectorXcd& x, double d);

/// Solves the relaxed program by consensus operator splitting: PSD slack
/// copies for every matrix inequality, a norm-prox copy for the
/// objective, clamp copies for the d floor (and the coefficient sign
/// constraint), and a cached least-squares solve for the (a, d) block.
/// Output is rescaled to the structure's trace target (a no-op for
/// trace-fixed structures).
EstimateReport coca_solve(const CocaProblem& problem, const CocaOptions& opts = {});

/// COCA over the full trace-fixed hyperplane (no structure beyond the
/// trace gauge); with n >= p+1 the result equals Tyler's estimator up to
/// scale.
EstimateReport coca_unconstrained(const SampleSet& samples,
                                  NormKind norm_kind = NormKind::frobenius,
                                  const CocaOptions& opts = {});

/// || Theta - (p/n) sum_i x_i x_i^H / (x_i^H Theta^-1 x_i) ||_norm, the
/// non-relaxed matching objective. Theta must be positive definite.
double gmm_objective(const HermitianMatrix& theta, const SampleSet& samples, NormKind norm_kind);

}  // namespace shapecov
