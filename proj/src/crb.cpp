#include "shapecov/crb.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "shapecov/sampling.hpp"

namespace shapecov {

CrbReport fim(const AffineStructure& structure, const HermitianMatrix& theta0) {
    if (!structure.scale_fixed()) throw std::invalid_argument("fim: structure must be scale-fixed");
    if (theta0.dim() != structure.p()) throw std::invalid_argument("fim: dimension mismatch");
    const int p = structure.p();
    const int k = structure.k();

    HermitianEig eig = hermitian_eig(theta0);
    if (!(eig.values.minCoeff() > 1e-12 * eig.values.maxCoeff())) {
        throw std::invalid_argument("fim: theta0 is not strictly positive definite");
    }
    const double member_res = structure.membership_residual(theta0);
    if (member_res > 1e-8 * std::max(1.0, theta0.mat().norm())) {
        throw std::invalid_argument("fim: theta0 is not a member of the structure set (residual " +
                                    std::to_string(member_res) + ")");
    }

    const Eigen::MatrixXcd Tinv = theta0.mat().llt().solve(Eigen::MatrixXcd::Identity(p, p));
    std::vector<Eigen::MatrixXcd> TD(k);
    Eigen::VectorXd tr_td(k);
    for (int i = 0; i < k; ++i) {
        TD[i] = Tinv * structure.basis()[i].mat();
        const Complex t = TD[i].trace();
        if (std::abs(t.imag()) > 1e-10 * std::max(1.0, std::abs(t.real()))) {
            throw std::runtime_error("fim: trace of T*D has non-real part " +
                                     std::to_string(t.imag()));
        }
        tr_td[i] = t.real();
    }

    Eigen::MatrixXd F(k, k);
    for (int h = 0; h < k; ++h) {
        for (int m = h; m < k; ++m) {
            const Complex t = (TD[m] * TD[h]).trace();
            if (std::abs(t.imag()) > 1e-10 * std::max(1.0, std::abs(t.real()))) {
                throw std::runtime_error("fim: product trace has non-real part " +
                                         std::to_string(t.imag()));
            }
            const double val = (p * t.real() - tr_td[h] * tr_td[m]) / (p + 1.0);
            F(h, m) = val;
            F(m, h) = val;
        }
    }

    CrbReport report;
    report.fim = F;
    report.jacobian = structure.basis_vec();
    if (k == 0) {
        report.crb_theta_trace = 0.0;
        report.condition = 1.0;
        return report;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fe(F);
    if (fe.info() != Eigen::Success) throw std::runtime_error("fim: eigensolver failed");
    const double wmin = fe.eigenvalues().minCoeff();
    const double wmax = fe.eigenvalues().maxCoeff();
    if (!(wmin > 0.0) || wmax / wmin > 1e12) {
        Eigen::Index arg = 0;
        fe.eigenvalues().minCoeff(&arg);
        throw NonIdentifiableError(
            "fim: information matrix is singular or near-singular (condition " +
                std::to_string(wmin > 0 ? wmax / wmin : std::numeric_limits<double>::infinity()) +
                "); the parametrization is not identifiable",
            fe.eigenvectors().col(arg));
    }
    report.condition = wmax / wmin;

    const Eigen::MatrixXd JtJ = report.jacobian.transpose() * report.jacobian;
    report.crb_theta_trace = F.llt().solve(JtJ).trace();
    return report;
}

Eigen::VectorXd score_fd(const AffineStructure& structure, const HermitianMatrix& theta0,
                         const Eigen::VectorXcd& x, double step) {
    if (!structure.scale_fixed()) {
        throw std::invalid_argument("score_fd: structure must be scale-fixed");
    }
    const int k = structure.k();
    if (k == 0) return Eigen::VectorXd(0);
    if (step <= 0.0) {
        step = 1e-4 * hermitian_eig(theta0).values.minCoeff();
        if (!(step > 0)) throw std::invalid_argument("score_fd: theta0 is not positive definite");
    }
    const Eigen::VectorXd a0 = structure.affine_coeffs(theta0);
    Eigen::VectorXd score(k);
    Eigen::VectorXd a = a0;
    for (int i = 0; i < k; ++i) {
        a[i] = a0[i] + step;
        HermitianMatrix plus = structure.assemble(a);
        a[i] = a0[i] - step;
        HermitianMatrix minus = structure.assemble(a);
        a[i] = a0[i];
        if (hermitian_eig(plus).values.minCoeff() <= 0 ||
            hermitian_eig(minus).values.minCoeff() <= 0) {
            throw std::invalid_argument(
                "score_fd: step too large, perturbed matrix is not positive definite");
        }
        score[i] = (cae_log_density(plus, x) - cae_log_density(minus, x)) / (2.0 * step);
    }
    return score;
}

double mse_bound(const CrbReport& report, int n) {
    if (n < 1) throw std::invalid_argument("mse_bound: need n >= 1");
    return report.crb_theta_trace / static_cast<double>(n);
}

}  // namespace shapecov
