#include "shapecov/structures.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace shapecov {

void DoaGrid::validate() const {
    if (p < 1) throw std::invalid_argument("DoaGrid: p must be >= 1");
    if (angles.empty()) throw std::invalid_argument("DoaGrid: need at least one grid angle");
    for (std::size_t i = 1; i < angles.size(); ++i) {
        if (!(angles[i] > angles[i - 1])) {
            throw std::invalid_argument("DoaGrid: angles must be strictly increasing");
        }
    }
    if (!(noise_power > 0)) throw std::invalid_argument("DoaGrid: noise_power must be > 0");
}

Eigen::VectorXcd steering_vector(int p, double theta) {
    Eigen::VectorXcd b(p);
    for (int k = 0; k < p; ++k) {
        b[k] = std::polar(1.0, static_cast<double>(k) * theta);
    }
    return b;
}

std::vector<double> uniform_angle_grid(int n, double lo, double hi) {
    if (n < 1) throw std::invalid_argument("uniform_angle_grid: n must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("uniform_angle_grid: need hi > lo");
    std::vector<double> out(n);
    const double step = (hi - lo) / n;
    for (int i = 0; i < n; ++i) out[i] = lo + (i + 0.5) * step;
    return out;
}

AffineStructure::AffineStructure(StructureFamily family, HermitianMatrix offset,
                                 std::vector<HermitianMatrix> basis, bool scale_fixed,
                                 double trace_target, bool nonneg_coeffs,
                                 std::optional<double> l1_bound)
    : family_(family),
      offset_(std::move(offset)),
      basis_(std::move(basis)),
      scale_fixed_(scale_fixed),
      trace_target_(trace_target),
      nonneg_coeffs_(nonneg_coeffs),
      l1_bound_(l1_bound) {
    const int p = offset_.dim();
    const int k = static_cast<int>(basis_.size());
    basis_vec_.resize(p * p, k);
    for (int i = 0; i < k; ++i) {
        if (basis_[i].dim() != p) {
            throw std::invalid_argument("AffineStructure: basis dimension mismatch");
        }
        basis_vec_.col(i) = real_vectorize(basis_[i]);
    }
    offset_vec_ = real_vectorize(offset_);

    if (k > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_vec_);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        if (!(smin > 1e-10 * smax)) {
            // Name the most dependent basis directions via column-pivoted QR.
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_vec_);
            std::ostringstream msg;
            msg << "AffineStructure: basis is numerically dependent (sigma_min/sigma_max = "
                << smin / smax << "); offending basis indices:";
            const auto perm = qr.colsPermutation().indices();
            const double r00 = std::abs(qr.matrixR()(0, 0));
            for (int i = 0; i < k; ++i) {
                if (i >= qr.rank() || std::abs(qr.matrixR()(i, i)) <= 1e-10 * r00) {
                    msg << " " << perm[i];
                }
            }
            throw std::invalid_argument(msg.str());
        }
    }

    if (scale_fixed_) {
        if (std::abs(offset_.trace() - trace_target_) > 1e-9 * std::max(1.0, trace_target_)) {
            throw std::invalid_argument("AffineStructure: scale-fixed offset trace " +
                                        std::to_string(offset_.trace()) +
                                        " does not match target " + std::to_string(trace_target_));
        }
        for (int i = 0; i < k; ++i) {
            if (std::abs(basis_[i].trace()) > 1e-10) {
                throw std::invalid_argument("AffineStructure: scale-fixed basis element " +
                                            std::to_string(i) + " is not trace-free");
            }
        }
    }

    gram_ = basis_vec_.transpose() * basis_vec_;
    if (k > 0) {
        gram_llt_.compute(gram_);
        if (gram_llt_.info() != Eigen::Success) {
            throw std::invalid_argument("AffineStructure: Gram factorization failed");
        }
    }
}

HermitianMatrix AffineStructure::assemble(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != k()) {
        throw std::invalid_argument("assemble: coefficient count mismatch");
    }
    Eigen::MatrixXcd m = offset_.mat();
    for (int i = 0; i < k(); ++i) m += coeffs[i] * basis_[i].mat();
    return HermitianMatrix(m);
}

Eigen::VectorXd AffineStructure::affine_coeffs(const HermitianMatrix& m) const {
    if (m.dim() != p()) throw std::invalid_argument("affine_coeffs: dimension mismatch");
    if (k() == 0) return Eigen::VectorXd(0);
    const Eigen::VectorXd rhs = basis_vec_.transpose() * (real_vectorize(m) - offset_vec_);
    return gram_llt_.solve(rhs);
}

Eigen::VectorXd AffineStructure::nonneg_coeffs_project(const HermitianMatrix& m) const {
    if (k() == 0) return Eigen::VectorXd(0);
    // min over a >= 0 of 0.5 a^T G a - c^T a, coordinate descent with clamp
    const Eigen::VectorXd c = basis_vec_.transpose() * (real_vectorize(m) - offset_vec_);
    Eigen::VectorXd a = affine_coeffs(m).cwiseMax(0.0);
    const int kk = k();
    Eigen::VectorXd grad = gram_ * a - c;
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 200 * kk + 200; ++sweep) {
        double max_change = 0.0;
        for (int i = 0; i < kk; ++i) {
            const double ai = std::max(0.0, a[i] - grad[i] / gram_(i, i));
            const double delta = ai - a[i];
            if (delta != 0.0) {
                grad += delta * gram_.col(i);
                a[i] = ai;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < 1e-14 * scale) break;
    }
    return a;
}

double AffineStructure::membership_residual(const HermitianMatrix& m) const {
    const Eigen::VectorXd v = real_vectorize(m) - offset_vec_;
    return (v - basis_vec_ * affine_coeffs(m)).norm();
}

AffineStructure toeplitz_structure(int p) {
    if (p < 1) throw std::invalid_argument("toeplitz_structure: p must be >= 1");
    std::vector<HermitianMatrix> basis;
    basis.push_back(HermitianMatrix::identity(p));
    for (int s = 1; s < p; ++s) {
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(p, p);
        for (int r = 0; r + s < p; ++r) {
            b(r, r + s) = 1.0;
            b(r + s, r) = 1.0;
        }
        basis.emplace_back(b);
    }
    for (int s = 1; s < p; ++s) {
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(p, p);
        for (int r = 0; r + s < p; ++r) {
            b(r, r + s) = Complex(0.0, 1.0);
            b(r + s, r) = Complex(0.0, -1.0);
        }
        basis.emplace_back(b);
    }
    return AffineStructure(StructureFamily::toeplitz, HermitianMatrix::zero(p), std::move(basis),
                           false, 0.0, false);
}

AffineStructure banded_structure(int p, int b) {
    if (p < 1) throw std::invalid_argument("banded_structure: p must be >= 1");
    if (b < 0 || b > p - 1) {
        throw std::invalid_argument("banded_structure: band must satisfy 0 <= b <= p-1, got " +
                                    std::to_string(b));
    }
    std::vector<HermitianMatrix> basis;
    // diagonal members first (2*E_ii), so the scale-fix can drop the last one
    for (int i = 0; i < p; ++i) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
        m(i, i) = 2.0;
        basis.emplace_back(m);
    }
    for (int i = 0; i < p; ++i) {
        for (int h = i + 1; h <= std::min(i + b, p - 1); ++h) {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
            m(i, h) = 1.0;
            m(h, i) = 1.0;
            basis.emplace_back(m);
        }
    }
    for (int i = 0; i < p; ++i) {
        for (int h = i + 1; h <= std::min(i + b, p - 1); ++h) {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
            m(i, h) = Complex(0.0, 1.0);
            m(h, i) = Complex(0.0, -1.0);
            basis.emplace_back(m);
        }
    }
    const int expected = p * (2 * b + 1) - b * (b + 1);
    if (static_cast<int>(basis.size()) != expected) {
        throw std::logic_error("banded_structure: basis count " + std::to_string(basis.size()) +
                               " != " + std::to_string(expected));
    }
    return AffineStructure(StructureFamily::banded, HermitianMatrix::zero(p), std::move(basis),
                           false, 0.0, false);
}

AffineStructure doa_structure(const DoaGrid& grid, std::optional<double> l1_bound) {
    grid.validate();
    const int p = grid.p;
    std::vector<HermitianMatrix> basis;
    basis.reserve(grid.angles.size());
    for (const double theta : grid.angles) {
        const Eigen::VectorXcd bv = steering_vector(p, theta);
        basis.emplace_back(Eigen::MatrixXcd(bv * bv.adjoint()));
    }
    return AffineStructure(StructureFamily::doa,
                           HermitianMatrix(grid.noise_power * Eigen::MatrixXcd::Identity(p, p)),
                           std::move(basis), false, 0.0, true, l1_bound);
}

AffineStructure scale_fix(const AffineStructure& s, double trace_target) {
    if (s.scale_fixed()) throw std::invalid_argument("scale_fix: structure is already scale-fixed");
    if (!(trace_target > 0)) throw std::invalid_argument("scale_fix: trace_target must be > 0");
    const int p = s.p();
    const int k = s.k();
    std::vector<HermitianMatrix> d_basis;

    switch (s.family()) {
        case StructureFamily::toeplitz: {
            // drop the identity coefficient; remaining B's are trace-free
            for (int i = 1; i < k; ++i) d_basis.push_back(s.basis()[i]);
            HermitianMatrix d0(Eigen::MatrixXcd((trace_target / p) *
                                                Eigen::MatrixXcd::Identity(p, p)));
            return AffineStructure(StructureFamily::toeplitz, d0, std::move(d_basis), true,
                                   trace_target, false);
        }
        case StructureFamily::banded: {
            // first p-1 diagonals relative to the last one, then off-diagonals
            for (int i = 0; i < p - 1; ++i) {
                d_basis.emplace_back(
                    Eigen::MatrixXcd(s.basis()[i].mat() - s.basis()[p - 1].mat()));
            }
            for (int i = p; i < k; ++i) d_basis.push_back(s.basis()[i]);
            HermitianMatrix d0(Eigen::MatrixXcd((trace_target / p) *
                                                Eigen::MatrixXcd::Identity(p, p)));
            return AffineStructure(StructureFamily::banded, d0, std::move(d_basis), true,
                                   trace_target, false);
        }
        case StructureFamily::doa: {
            const double sigma2 = s.offset().mat()(0, 0).real();
            const double canonical = sigma2 * p;
            if (std::abs(trace_target - canonical) > 1e-12 * std::max(1.0, canonical)) {
                throw std::invalid_argument(
                    "scale_fix: DOA trace target is fixed at sigma^2*p = " +
                    std::to_string(canonical) + ", got " + std::to_string(trace_target));
            }
            for (int i = 0; i < k; ++i) {
                d_basis.emplace_back(Eigen::MatrixXcd(
                    s.basis()[i].mat() - Eigen::MatrixXcd::Identity(p, p)));
            }
            return AffineStructure(StructureFamily::doa, s.offset(), std::move(d_basis), true,
                                   canonical, true, s.l1_bound());
        }
        case StructureFamily::custom:
            break;
    }
    throw std::invalid_argument("scale_fix: unsupported structure family");
}

AffineStructure full_structure(int p, double trace_target) {
    return scale_fix(banded_structure(p, std::max(0, p - 1)), trace_target);
}

std::pair<Eigen::VectorXd, HermitianMatrix> affine_project(const AffineStructure& s,
                                                           const HermitianMatrix& m) {
    if (!s.scale_fixed()) throw std::invalid_argument("affine_project: structure must be scale-fixed");
    Eigen::VectorXd a = s.affine_coeffs(m);
    return {a, s.assemble(a)};
}

HermitianMatrix structure_project(const AffineStructure& s, const HermitianMatrix& m,
                                  ProjectionDiagnostics* diag, double tol, int max_sweeps) {
    if (!s.scale_fixed()) {
        throw std::invalid_argument("structure_project: structure must be scale-fixed");
    }
    if (m.dim() != s.p()) throw std::invalid_argument("structure_project: dimension mismatch");
    const int p = s.p();

    // Dykstra between the affine set (nonneg-constrained for DOA) and the PSD cone
    Eigen::MatrixXcd x = m.mat();
    Eigen::MatrixXcd inc_a = Eigen::MatrixXcd::Zero(p, p);
    Eigen::MatrixXcd inc_b = Eigen::MatrixXcd::Zero(p, p);
    double movement = 0.0;
    const double scale = std::max(1.0, m.mat().norm());
    int sweep = 0;
    HermitianMatrix result = HermitianMatrix::zero(p);
    for (; sweep < max_sweeps; ++sweep) {
        const HermitianMatrix ya_in(x + inc_a);
        HermitianMatrix ya = s.nonneg_coeffs() ? s.assemble(s.nonneg_coeffs_project(ya_in))
                                               : s.assemble(s.affine_coeffs(ya_in));
        inc_a = (x + inc_a) - ya.mat();
        const HermitianMatrix yb_in(ya.mat() + inc_b);
        HermitianMatrix yb = psd_project(yb_in);
        inc_b = (ya.mat() + inc_b) - yb.mat();
        movement = (yb.mat() - x).norm();
        x = yb.mat();
        result = yb;
        if (sweep > 0 && movement < tol * scale) break;
    }
    const double affine_res = s.membership_residual(result);
    const double min_eig = hermitian_eig(result).values.minCoeff();
    if (diag) {
        diag->sweeps = sweep + 1;
        diag->movement = movement;
        diag->affine_residual = affine_res;
        diag->min_eigenvalue = min_eig;
    }
    if (movement >= tol * scale || affine_res > 1e-7 * scale || min_eig < -1e-7 * scale) {
        std::ostringstream msg;
        msg << "structure_project: no convergence after " << sweep
            << " sweeps (movement " << movement << ", affine residual " << affine_res
            << ", min eigenvalue " << min_eig
            << "); the intersection may be empty or nearly empty";
        throw std::runtime_error(msg.str());
    }
    return result;
}

}  // namespace shapecov
