#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "shapecov/hermitian.hpp"

namespace shapecov {

enum class StructureFamily { toeplitz, banded, doa, custom };

/// Uniform-linear-array grid for the direction-of-arrival structure.
struct DoaGrid {
    int p = 0;                   // sensor count
    std::vector<double> angles;  // strictly increasing grid angles
    double noise_power = 0.0;    // sigma^2 > 0

    void validate() const;
};

/// Steering vector b(theta) = [1, e^{j theta}, ..., e^{(p-1) j theta}]^T.
Eigen::VectorXcd steering_vector(int p, double theta);

/// Evenly spread grid of n angles over [lo, hi]: midpoints of n equal
/// subintervals.
std::vector<double> uniform_angle_grid(int n, double lo, double hi);

/// An affine set of hermitian matrices offset + span{basis} with real
/// coefficients, optionally scale-fixed (all members share a common
/// trace because every basis matrix is trace-free). Structures are
/// immutable after construction; the real-vectorized basis and its
/// normal-equation factorization are cached for projections.
class AffineStructure {
public:
    AffineStructure(StructureFamily family, HermitianMatrix offset,
                    std::vector<HermitianMatrix> basis, bool scale_fixed,
                    double trace_target, bool nonneg_coeffs,
                    std::optional<double> l1_bound = std::nullopt);

    StructureFamily family() const { return family_; }
    int p() const { return offset_.dim(); }
    int k() const { return static_cast<int>(basis_.size()); }
    bool scale_fixed() const { return scale_fixed_; }
    double trace_target() const { return trace_target_; }
    bool nonneg_coeffs() const { return nonneg_coeffs_; }
    std::optional<double> l1_bound() const { return l1_bound_; }
    const HermitianMatrix& offset() const { return offset_; }
    const std::vector<HermitianMatrix>& basis() const { return basis_; }
    const Eigen::MatrixXd& basis_vec() const { return basis_vec_; }
    const Eigen::VectorXd& offset_vec() const { return offset_vec_; }

    /// offset + sum_i a_i basis_i.
    HermitianMatrix assemble(const Eigen::VectorXd& coeffs) const;

    /// Unconstrained least-squares coefficients of the affine projection
    /// of m (cached normal equations).
    Eigen::VectorXd affine_coeffs(const HermitianMatrix& m) const;

    /// Coefficients of the projection onto {offset + sum a_i basis_i,
    /// a_i >= 0}, by coordinate descent on the cached normal equations.
    Eigen::VectorXd nonneg_coeffs_project(const HermitianMatrix& m) const;

    /// Frobenius distance from m to the affine set.
    double membership_residual(const HermitianMatrix& m) const;

private:
    StructureFamily family_;
    HermitianMatrix offset_;
    std::vector<HermitianMatrix> basis_;
    bool scale_fixed_;
    double trace_target_;
    bool nonneg_coeffs_;
    std::optional<double> l1_bound_;
    Eigen::MatrixXd basis_vec_;   // p^2 x k
    Eigen::VectorXd offset_vec_;  // p^2
    Eigen::MatrixXd gram_;        // k x k
    Eigen::LLT<Eigen::MatrixXd> gram_llt_;
};

/// Unscaled Toeplitz hyperplane: B0 = 0, B1 = I, then the real and
/// imaginary sub-diagonal indicators; k = 2p - 1.
AffineStructure toeplitz_structure(int p);

/// Unscaled b-banded hyperplane: diagonal matrices 2*E_ii first, then the
/// symmetric and hermitian off-diagonal pairs in row-major order;
/// k = p(2b+1) - b(b+1).
AffineStructure banded_structure(int p, int b);

/// Unscaled DOA structure: offset sigma^2*I, basis of steering outer
/// products, coefficients constrained nonnegative.
AffineStructure doa_structure(const DoaGrid& grid, std::optional<double> l1_bound = std::nullopt);

/// Scale-fixed reparametrization with trace-free basis:
///   toeplitz: D0 = (target/p) I, D_i = B_{i+1};
///   banded:   D0 = (target/p) I, D_i = B_i - B_p for the first p-1
///             diagonals, then the off-diagonal B's;
///   doa:      D0 = sigma^2 I, D_i = B_i - I, target forced to sigma^2*p.
AffineStructure scale_fix(const AffineStructure& s, double trace_target);

/// Scale-fixed full hermitian hyperplane {Theta : tr(Theta) = trace_target}
/// (the structure of the unconstrained estimators).
AffineStructure full_structure(int p, double trace_target);

/// Projection onto the affine set: coefficients and assembled matrix.
std::pair<Eigen::VectorXd, HermitianMatrix> affine_project(const AffineStructure& s,
                                                           const HermitianMatrix& m);

struct ProjectionDiagnostics {
    int sweeps = 0;
    double movement = 0.0;
    double affine_residual = 0.0;
    double min_eigenvalue = 0.0;
};

/// Frobenius projection onto the intersection of the affine set with the
/// PSD cone, by Dykstra's alternating projections. Stops when successive
/// iterates move less than `tol` in Frobenius norm; throws on
/// non-convergence within `max_sweeps` (signals an empty or near-empty
/// intersection), carrying the final residuals in the message.
HermitianMatrix structure_project(const AffineStructure& s, const HermitianMatrix& m,
                                  ProjectionDiagnostics* diag = nullptr, double tol = 1e-9,
                                  int max_sweeps = 10000);

}  // namespace shapecov
