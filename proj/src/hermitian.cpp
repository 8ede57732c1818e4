#include "shapecov/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace shapecov {

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& m, double sym_tol) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw std::invalid_argument("HermitianMatrix: need a square matrix with dim >= 1, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
    if (asym > 2.0 * sym_tol * scale) {
        throw std::invalid_argument("HermitianMatrix: input is not hermitian (asymmetry " +
                                    std::to_string(asym) + ")");
    }
    m_ = 0.5 * (m + m.adjoint().eval());
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        m_(i, i) = Complex(m_(i, i).real(), 0.0);
    }
}

HermitianMatrix HermitianMatrix::identity(int p) {
    return HermitianMatrix(Eigen::MatrixXcd::Identity(p, p));
}

HermitianMatrix HermitianMatrix::zero(int p) {
    return HermitianMatrix(Eigen::MatrixXcd::Zero(p, p));
}

HermitianMatrix HermitianMatrix::with_trace(double target) const {
    const double tr = trace();
    if (std::abs(tr) < 1e-300) {
        throw std::invalid_argument("with_trace: matrix has zero trace");
    }
    return HermitianMatrix(m_ * (target / tr));
}

HermitianEig hermitian_eig(const HermitianMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.mat());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eig: eigensolver did not converge (dim " +
                                 std::to_string(m.dim()) + ", frobenius norm " +
                                 std::to_string(m.mat().norm()) + ")");
    }
    return HermitianEig{solver.eigenvalues(), solver.eigenvectors()};
}

double quad_form(const HermitianMatrix& m, const Eigen::VectorXcd& x) {
    if (x.size() != m.dim()) {
        throw std::invalid_argument("quad_form: dimension mismatch (matrix " +
                                    std::to_string(m.dim()) + ", vector " +
                                    std::to_string(x.size()) + ")");
    }
    const Complex v = x.dot(m.mat() * x);  // x^H M x
    const double bound = 1e-10 * m.mat().norm() * x.squaredNorm();
    if (std::abs(v.imag()) > bound) {
        throw std::runtime_error("quad_form: imaginary part " + std::to_string(v.imag()) +
                                 " exceeds tolerance " + std::to_string(bound));
    }
    return v.real();
}

HermitianMatrix psd_project(const HermitianMatrix& m) {
    HermitianEig eig = hermitian_eig(m);
    Eigen::VectorXd w = eig.values.cwiseMax(0.0);
    return HermitianMatrix(eig.vectors * w.asDiagonal() * eig.vectors.adjoint());
}

Eigen::VectorXd real_vectorize(const HermitianMatrix& m) {
    const int p = m.dim();
    const double r2 = std::sqrt(2.0);
    Eigen::VectorXd out(p * p);
    for (int i = 0; i < p; ++i) out[i] = m.mat()(i, i).real();
    int k = p;
    for (int i = 0; i < p; ++i) {
        for (int h = i + 1; h < p; ++h) {
            out[k++] = r2 * m.mat()(i, h).real();
            out[k++] = r2 * m.mat()(i, h).imag();
        }
    }
    return out;
}

HermitianMatrix real_unvectorize(const Eigen::VectorXd& v, int p) {
    if (v.size() != static_cast<Eigen::Index>(p) * p) {
        throw std::invalid_argument("real_unvectorize: vector length " + std::to_string(v.size()) +
                                    " does not match dim " + std::to_string(p));
    }
    const double inv_r2 = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
    for (int i = 0; i < p; ++i) m(i, i) = v[i];
    int k = p;
    for (int i = 0; i < p; ++i) {
        for (int h = i + 1; h < p; ++h) {
            m(i, h) = Complex(v[k] * inv_r2, v[k + 1] * inv_r2);
            m(h, i) = std::conj(m(i, h));
            k += 2;
        }
    }
    return HermitianMatrix(m);
}

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "frobenius") return NormKind::frobenius;
    if (s == "spectral") return NormKind::spectral;
    if (s == "trace") return NormKind::trace;
    throw std::invalid_argument("unknown norm kind '" + s + "' (expected frobenius|spectral|trace)");
}

std::string to_string(NormKind kind) {
    switch (kind) {
        case NormKind::frobenius: return "frobenius";
        case NormKind::spectral: return "spectral";
        case NormKind::trace: return "trace";
    }
    return "?";
}

double matrix_norm(const HermitianMatrix& m, NormKind kind) {
    if (kind == NormKind::frobenius) return m.mat().norm();
    HermitianEig eig = hermitian_eig(m);
    if (kind == NormKind::spectral) return eig.values.cwiseAbs().maxCoeff();
    return eig.values.cwiseAbs().sum();
}

namespace {

// Euclidean projection of v onto the l1 ball of radius r, sign-preserving.
Eigen::VectorXd l1_ball_project(const Eigen::VectorXd& v, double r) {
    if (v.cwiseAbs().sum() <= r) return v;
    std::vector<double> u(v.data(), v.data() + v.size());
    for (double& x : u) x = std::abs(x);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double cand = (cum - r) / static_cast<double>(i + 1);
        if (u[i] - cand > 0) theta = cand;
    }
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::max(std::abs(v[i]) - theta, 0.0);
        out[i] = v[i] < 0 ? -mag : mag;
    }
    return out;
}

}  // namespace

HermitianMatrix norm_prox(const HermitianMatrix& m, NormKind kind, double t) {
    if (!(t > 0)) {
        throw std::invalid_argument("norm_prox: t must be positive, got " + std::to_string(t));
    }
    if (kind == NormKind::frobenius) {
        const double nm = m.mat().norm();
        if (nm <= t) return HermitianMatrix::zero(m.dim());
        return HermitianMatrix(m.mat() * (1.0 - t / nm));
    }
    HermitianEig eig = hermitian_eig(m);
    Eigen::VectorXd w(eig.values.size());
    if (kind == NormKind::trace) {
        // soft-threshold each eigenvalue toward zero by t
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double mag = std::max(std::abs(eig.values[i]) - t, 0.0);
            w[i] = eig.values[i] < 0 ? -mag : mag;
        }
    } else {
        // Moreau: prox of t*spectral = M - projection onto nuclear ball of radius t
        w = eig.values - l1_ball_project(eig.values, t);
    }
    return HermitianMatrix(eig.vectors * w.asDiagonal() * eig.vectors.adjoint());
}

}  // namespace shapecov
