#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace shapecov {

using Complex = std::complex<double>;

/// Dense complex hermitian matrix, the carrier for shape matrices,
/// structure basis elements and sample outer products.
///
/// Hermitian symmetry is validated on construction (to 1e-12 relative to
/// the largest entry magnitude) and the stored matrix is then symmetrized
/// exactly, so kernels may rely on m(i,h) == conj(m(h,i)) bit-for-bit and
/// on a purely real diagonal.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const Eigen::MatrixXcd& m, double sym_tol = 1e-12);

    static HermitianMatrix identity(int p);
    static HermitianMatrix zero(int p);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXcd& mat() const { return m_; }
    double trace() const { return m_.trace().real(); }

    /// Same matrix rescaled to the requested trace. Requires trace() != 0.
    HermitianMatrix with_trace(double target) const;

private:
    Eigen::MatrixXcd m_;
};

/// Eigendecomposition of a hermitian matrix, ascending eigenvalues.
struct HermitianEig {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};

/// Hermitian-specific eigensolver; throws std::runtime_error on
/// non-convergence with the failing dimension in the message.
HermitianEig hermitian_eig(const HermitianMatrix& m);

/// Re(x^H M x). The imaginary part of the computed scalar is checked
/// below 1e-10 * ||M||_F * ||x||^2.
double quad_form(const HermitianMatrix& m, const Eigen::VectorXcd& x);

/// Frobenius-nearest positive semidefinite matrix: eigenvalues clamped at
/// exactly zero, no epsilon flooring.
HermitianMatrix psd_project(const HermitianMatrix& m);

/// Linear isometry Hermitian(p) -> R^{p^2}: diagonal first, then
/// sqrt(2)*Re and sqrt(2)*Im of each strictly-upper entry in row-major
/// order. ||real_vectorize(M)||_2 == ||M||_F, and dot products match
/// <M,N> = Re tr(MN). This layout is the file-format convention used by
/// every CSV that carries a matrix.
Eigen::VectorXd real_vectorize(const HermitianMatrix& m);

/// Inverse of real_vectorize.
HermitianMatrix real_unvectorize(const Eigen::VectorXd& v, int p);

enum class NormKind { frobenius, spectral, trace };

NormKind norm_kind_from_string(const std::string& s);
std::string to_string(NormKind kind);

/// frobenius = sqrt(sum |m_ih|^2); spectral = max |eigenvalue|;
/// trace = sum |eigenvalue| (nuclear norm).
double matrix_norm(const HermitianMatrix& m, NormKind kind);

/// argmin_X { t*||X||_kind + 0.5*||X - M||_F^2 }, t > 0.
HermitianMatrix norm_prox(const HermitianMatrix& m, NormKind kind, double t);

}  // namespace shapecov
