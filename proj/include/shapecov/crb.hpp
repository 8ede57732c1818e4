#pragma once

#include "shapecov/structures.hpp"

namespace shapecov {

/// Fisher information in structure coordinates plus its lift to matrix
/// space. fim is symmetric positive definite (singularity is rejected as
/// non-identifiability); crb_theta_trace = tr(J FIM^-1 J^T).
struct CrbReport {
    Eigen::MatrixXd fim;       // k' x k'
    Eigen::MatrixXd jacobian;  // p^2 x k', real-vectorized D basis
    double crb_theta_trace = 0.0;
    double condition = 0.0;
};

/// Thrown when the information matrix is singular; carries the blamed
/// null-space direction in structure coordinates.
class NonIdentifiableError : public std::runtime_error {
public:
    NonIdentifiableError(const std::string& what, Eigen::VectorXd direction)
        : std::runtime_error(what), null_direction(std::move(direction)) {}
    Eigen::VectorXd null_direction;
};

/// Closed-form per-sample Fisher information of the scale-fixed model at
/// theta0 (a member of the structure set, residual below 1e-8):
///   FIM_hm = [p tr(T D_m T D_h) - tr(T D_h) tr(T D_m)] / (p+1),
/// with T = theta0^-1. Refuses condition numbers above 1e12.
CrbReport fim(const AffineStructure& structure, const HermitianMatrix& theta0);

/// Central finite-difference gradient of the log density in the
/// structure coordinates at theta0; the Monte Carlo oracle for fim.
/// step <= 0 selects 1e-4 times the smallest eigenvalue of theta0.
Eigen::VectorXd score_fd(const AffineStructure& structure, const HermitianMatrix& theta0,
                         const Eigen::VectorXcd& x, double step = 0.0);

/// Lower bound on E||Theta_hat - Theta_0||_F^2 from n i.i.d. samples:
/// crb_theta_trace / n.
double mse_bound(const CrbReport& report, int n);

}  // namespace shapecov
